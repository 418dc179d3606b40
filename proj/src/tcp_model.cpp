// SPDX-License-Identifier: Apache-2.0

#include "ncsim/tcp_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ncsim {

TcpSender::TcpSender(TcpConfig config)
    : config_(config), ssthresh_(config.initial_ssthresh), rto_(config.rto_initial) {}

TcpSegment TcpSender::connect(double now) {
    *this = TcpSender(config_);
    state_ = State::SynSent;
    syn_sent_count_ = 1;
    arm(now);
    TcpSegment syn;
    syn.src_port = config_.local_port;
    syn.dst_port = config_.remote_port;
    syn.seq = config_.isn;
    syn.flags = Flags{Flags::syn};
    syn.window = 0xFFFF;
    syn.options = mss_option(config_.mss_offer);
    timed_ = {config_.isn, now};
    return syn;
}

std::size_t TcpSender::unsent_bytes() const {
    const std::size_t sent = static_cast<std::size_t>(next_seq_ - send_base_) * mss_;
    return buffer_.size() > sent ? buffer_.size() - sent : 0;
}

std::size_t TcpSender::window_segments() const {
    const auto cwnd = static_cast<std::size_t>(std::floor(cwnd_));
    const std::size_t rwnd = std::max<std::size_t>(1, config_.rwnd_bytes / mss_);
    return std::max<std::size_t>(1, std::min(cwnd, rwnd));
}

TcpSegment TcpSender::make_segment(std::uint32_t seq, double now) {
    TcpSegment seg;
    seg.src_port = config_.local_port;
    seg.dst_port = config_.remote_port;
    seg.seq = seq;
    seg.ack = peer_ack_;
    seg.flags = Flags{Flags::ack};
    seg.window = 0xFFFF;
    const auto begin = buffer_.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(seq - send_base_) * mss_);
    seg.payload.assign(begin, begin + mss_);
    ++stats_.segments_sent;
    if (seq + 1 <= high_seq_) {
        ++stats_.retransmissions;
        if (timed_ && timed_->first >= seq) timed_.reset();
    } else {
        high_seq_ = seq + 1;
        if (!timed_) timed_ = {seq, now};
    }
    return seg;
}

std::vector<TcpSegment> TcpSender::send_new(double now) {
    std::vector<TcpSegment> out;
    if (state_ != State::Established) return out;
    while (in_flight() < window_segments() && unsent_bytes() >= mss_) {
        out.push_back(make_segment(next_seq_, now));
        ++next_seq_;
        stats_.worst_window_excess =
            std::max(stats_.worst_window_excess, static_cast<double>(in_flight()) - std::floor(cwnd_));
        if (!deadline_) arm(now);
    }
    return out;
}

std::vector<TcpSegment> TcpSender::on_app_data(std::span<const std::uint8_t> bytes, double now) {
    buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
    return send_new(now);
}

void TcpSender::rtt_sample(double sample) {
    if (!srtt_) {
        srtt_ = sample;
        rttvar_ = sample / 2.0;
    } else {
        rttvar_ = 0.75 * rttvar_ + 0.25 * std::abs(*srtt_ - sample);
        srtt_ = 0.875 * *srtt_ + 0.125 * sample;
    }
    rto_ = std::clamp(*srtt_ + 4.0 * rttvar_, config_.rto_min, config_.rto_max);
}

std::vector<TcpSegment> TcpSender::on_segment(const TcpSegment& seg, double now) {
    std::vector<TcpSegment> out;
    if (seg.flags.has(Flags::rst)) {
        *this = TcpSender(config_);
        return out;
    }
    if (seg.flags.has(Flags::syn)) {
        if (!seg.flags.has(Flags::ack) || seg.ack != config_.isn + 1) return out;
        if (state_ == State::SynSent) {
            peer_ack_ = seg.seq + 1;
            mss_ = std::min<std::uint16_t>(config_.mss_offer, find_mss(seg).value_or(536));
            state_ = State::Established;
            send_base_ = next_seq_ = high_seq_ = config_.isn + 1;
            deadline_.reset();
            if (timed_ && syn_sent_count_ == 1) rtt_sample(now - timed_->second);
            timed_.reset();
        }
        if (state_ != State::Established) return out;
        TcpSegment ack;
        ack.src_port = config_.local_port;
        ack.dst_port = config_.remote_port;
        ack.seq = next_seq_;
        ack.ack = peer_ack_;
        ack.flags = Flags{Flags::ack};
        ack.window = 0xFFFF;
        out.push_back(std::move(ack));
        auto data = send_new(now);
        out.insert(out.end(), data.begin(), data.end());
        return out;
    }
    if (seg.flags.has(Flags::fin)) {
        state_ = State::Closed;
        deadline_.reset();
        return out;
    }
    if (state_ != State::Established || !seg.flags.has(Flags::ack)) return out;

    const std::uint32_t a = seg.ack;
    if (a > high_seq_) return out;
    if (a > send_base_) {
        if (timed_ && a > timed_->first) {
            rtt_sample(now - timed_->second);
            timed_.reset();
        }
        const std::size_t acked = static_cast<std::size_t>(a - send_base_) * mss_;
        buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(std::min(acked, buffer_.size())));
        send_base_ = a;
        if (next_seq_ < a) next_seq_ = a;
        dup_acks_ = 0;

        if (recover_) {
            if (a >= *recover_) {
                recover_.reset();
                cwnd_ = ssthresh_;
            } else {
                out.push_back(make_segment(send_base_, now));
            }
        } else if (cwnd_ < ssthresh_) {
            cwnd_ += 1.0;
        } else {
            cwnd_ += 1.0 / cwnd_;
        }

        if (in_flight() == 0) {
            deadline_.reset();
        } else {
            arm(now);
        }
    } else if (a == send_base_ && in_flight() > 0 && seg.payload.empty()) {
        ++dup_acks_;
        if (dup_acks_ == 3 && !recover_) {
            ++stats_.fast_retransmits;
            ssthresh_ = std::max(cwnd_ / 2.0, 2.0);
            cwnd_ = ssthresh_;
            recover_ = high_seq_;
            out.push_back(make_segment(send_base_, now));
            arm(now);
        }
    }
    auto data = send_new(now);
    out.insert(out.end(), data.begin(), data.end());
    return out;
}

std::vector<TcpSegment> TcpSender::on_timeout(double now) {
    std::vector<TcpSegment> out;
    if (!deadline_ || now < *deadline_) return out;
    if (state_ == State::SynSent) {
        if (syn_sent_count_ >= config_.syn_attempts)
            throw Error(ErrorCode::HandshakeTimeout, "no SYN-ACK after " + std::to_string(syn_sent_count_) + " SYNs");
        const int sent = syn_sent_count_;
        const double rto = std::min(rto_ * 2.0, config_.rto_max);
        out.push_back(connect(now));
        syn_sent_count_ = sent + 1;
        rto_ = rto;
        timed_.reset();
        arm(now);
        return out;
    }
    if (state_ != State::Established || in_flight() == 0) {
        deadline_.reset();
        return out;
    }
    ++stats_.timeouts;
    ssthresh_ = std::max(cwnd_ / 2.0, 2.0);
    cwnd_ = 1.0;
    rto_ = std::min(rto_ * 2.0, config_.rto_max);
    next_seq_ = send_base_;
    recover_.reset();
    dup_acks_ = 0;
    timed_.reset();
    deadline_.reset();
    arm(now);
    return send_new(now);
}

TcpSegment TcpSender::close() {
    TcpSegment fin;
    fin.src_port = config_.local_port;
    fin.dst_port = config_.remote_port;
    fin.seq = next_seq_;
    fin.ack = peer_ack_;
    fin.flags = Flags{Flags::fin | Flags::ack};
    fin.window = 0xFFFF;
    state_ = State::Closed;
    deadline_.reset();
    return fin;
}

// ---------------------------------------------------------------------- sink

TcpReceiver::TcpReceiver(TcpConfig config) : config_(config) {}

TcpSegment TcpReceiver::make_ack(std::uint8_t flags) const {
    TcpSegment ack;
    ack.src_port = config_.local_port;
    ack.dst_port = peer_port_;
    ack.seq = config_.isn + 1;
    ack.ack = rcv_next_;
    ack.flags = Flags{flags};
    ack.window = static_cast<std::uint16_t>(std::min<std::uint32_t>(config_.rwnd_bytes, 0xFFFF));
    return ack;
}

std::vector<TcpSegment> TcpReceiver::on_segment(const TcpSegment& seg, double) {
    std::vector<TcpSegment> out;
    if (seg.flags.has(Flags::rst)) {
        connected_ = false;
        out_of_order_.clear();
        return out;
    }
    if (seg.flags.has(Flags::syn)) {
        if (!connected_ || rcv_next_ != seg.seq + 1) {
            connected_ = true;
            peer_port_ = seg.src_port;
            rcv_next_ = seg.seq + 1;
            out_of_order_.clear();
        }
        auto syn_ack = make_ack(Flags::syn | Flags::ack);
        syn_ack.seq = config_.isn;
        syn_ack.options = mss_option(config_.mss_offer);
        out.push_back(std::move(syn_ack));
        return out;
    }
    if (!connected_) return out;
    if (seg.flags.has(Flags::fin)) {
        rcv_next_ = seg.seq + 1;
        out.push_back(make_ack(Flags::fin | Flags::ack));
        connected_ = false;
        out_of_order_.clear();
        return out;
    }
    if (seg.payload.empty()) return out;

    if (seg.seq == rcv_next_) {
        auto deliver = [this](const Bytes& payload) {
            delivered_.insert(delivered_.end(), payload.begin(), payload.end());
            ++stats_.delivered_segments;
            stats_.delivered_bytes += payload.size();
            ++rcv_next_;
        };
        deliver(seg.payload);
        for (auto it = out_of_order_.find(rcv_next_); it != out_of_order_.end(); it = out_of_order_.find(rcv_next_)) {
            deliver(it->second);
            out_of_order_.erase(it);
        }
    } else if (seg.seq > rcv_next_ && !out_of_order_.contains(seg.seq)) {
        out_of_order_.emplace(seg.seq, seg.payload);
        ++stats_.out_of_order_segments;
    } else {
        ++stats_.duplicate_segments;
    }
    out.push_back(make_ack(Flags::ack));
    ++stats_.acks_sent;
    return out;
}

Bytes TcpReceiver::take_delivered() {
    Bytes out;
    out.swap(delivered_);
    return out;
}

std::uint16_t tcp_handshake(TcpSender& initiator, TcpReceiver& responder, const HandshakePath& path, double now) {
    std::vector<TcpSegment> syns{initiator.connect(now)};
    while (!initiator.established()) {
        for (const auto& syn : syns) {
            const auto at_responder = path(syn, Direction::Forward);
            if (!at_responder) continue;
            for (const auto& reply : responder.on_segment(*at_responder, now)) {
                const auto at_initiator = path(reply, Direction::Reverse);
                if (!at_initiator) continue;
                for (const auto& ack : initiator.on_segment(*at_initiator, now)) {
                    if (auto s = path(ack, Direction::Forward)) responder.on_segment(*s, now);
                }
            }
        }
        if (initiator.established()) break;
        now = initiator.next_deadline().value_or(now);
        syns = initiator.on_timeout(now);
    }
    return initiator.mss();
}

} // namespace ncsim
