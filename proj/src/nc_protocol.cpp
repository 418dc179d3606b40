// SPDX-License-Identifier: Apache-2.0

#include "ncsim/nc_protocol.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ncsim {

namespace {

NcSegment passthrough(const TcpSegment& seg) {
    auto [hdr, body] = strip_header(seg);
    return NcSegment{std::move(hdr), std::move(body)};
}

void append(NcOutput& into, NcOutput&& from) {
    into.to_ip.insert(into.to_ip.end(), std::make_move_iterator(from.to_ip.begin()), std::make_move_iterator(from.to_ip.end()));
    into.to_tcp.insert(into.to_tcp.end(), std::make_move_iterator(from.to_tcp.begin()),
                       std::make_move_iterator(from.to_tcp.end()));
}

} // namespace

void validate(const NcConfig& config) {
    const SegmentCodec probe(config.code);
    const auto s = config.threshold();
    if (s < config.code.k || s > config.code.k + emitted_redundancy(config.code))
        throw Error(ErrorCode::BadParams, "speculative ACK threshold " + std::to_string(s) + " outside [k, n]");
    if (config.max_outstanding < 1 || config.max_outstanding > config.reorder_pool)
        throw Error(ErrorCode::BadParams, "transmitter window must lie in [1, reorder_pool]");
    if (max_payload(config.code) < 1)
        throw Error(ErrorCode::BadParams, "segment_size leaves no room for payload");
    if (config.code.segment_size > 0xFFFF) throw Error(ErrorCode::BadParams, "segment_size exceeds 65535");
    if (!(config.flush_delay >= 0.0) || !(config.default_rtt > 0.0) || !(config.rto_cap_factor >= 2.0) ||
        !(config.min_rto >= 0.0))
        throw Error(ErrorCode::BadParams, "timer parameters out of range");
}

// ---------------------------------------------------------------- transmitter

Transmitter::Transmitter(NcConfig config)
    : config_((validate(config), config)), codec_(config_.code), rtt_(config_.default_rtt) {}

void Transmitter::reset() {
    pending_.clear();
    outstanding_.clear();
    next_tcp_seq_.reset();
    seq_shift_ = 0;
    last_tcp_arrival_ = 0.0;
    syn_sent_at_.reset();
    rtt_ = config_.default_rtt;
    srtt_.reset();
    rttvar_ = 0.0;
    backoff_ = 0;
}

bool Transmitter::in_initial_state() const {
    return pending_.empty() && outstanding_.empty() && !next_tcp_seq_ && seq_shift_ == 0 && !syn_sent_at_ &&
           rtt_ == config_.default_rtt && !srtt_ && backoff_ == 0;
}

bool Transmitter::can_emit() const {
    return uncleared() < config_.max_outstanding && outstanding_.size() < config_.reorder_pool;
}

std::size_t Transmitter::uncleared() const {
    return static_cast<std::size_t>(
        std::count_if(outstanding_.begin(), outstanding_.end(), [](const Outstanding& cw) { return !cw.cleared; }));
}

double Transmitter::current_rto() const {
    double base = std::max(2.0 * rtt_, config_.min_rto);
    if (srtt_) base = std::max(base, *srtt_ + 4.0 * rttvar_);
    return std::min(base * std::ldexp(1.0, backoff_), config_.rto_cap_factor * rtt_);
}

NcOutput Transmitter::on_tcp_segment(const TcpSegment& seg, double now) {
    NcOutput out;
    if (seg.flags.has(Flags::rst)) {
        out.to_ip.push_back(passthrough(seg));
        reset();
        return out;
    }
    if (seg.flags.has(Flags::syn)) {
        const TcpSegment syn = find_mss(seg) ? tx_rewrite_mss(seg, config_.code) : seg;
        syn_sent_at_ = now;
        next_tcp_seq_ = seg.seq + 1;
        out.to_ip.push_back(passthrough(syn));
        return out;
    }
    if (seg.flags.has(Flags::fin)) {
        // Whatever is still buffered goes out as padded blocks before the FIN.
        while (!pending_.empty()) {
            auto block = emit_block(std::min(pending_.size(), config_.code.k), now);
            out.to_ip.insert(out.to_ip.end(), block.begin(), block.end());
        }
        out.to_ip.push_back(passthrough(seg));
        reset();
        return out;
    }
    if (seg.payload.empty()) {
        // No TCP acknowledgments cross an NC network.
        ++stats_.dropped_tcp_acks;
        return out;
    }
    if (next_tcp_seq_ && seg.seq != *next_tcp_seq_) {
        if (seg.seq < *next_tcp_seq_) {
            // The NC layer owns loss recovery for anything it has accepted.
            ++stats_.dropped_tcp_retransmissions;
            return out;
        }
        throw std::logic_error("TCP sequence gap at the NC transmitter");
    }
    next_tcp_seq_ = seg.seq + 1;
    pending_.push_back(seg);
    last_tcp_arrival_ = now;
    return pump(now);
}

NcOutput Transmitter::on_ip_segment(const NcSegment& seg, double now) {
    const auto& h = seg.header;
    NcOutput out;
    if (h.flags.has(Flags::syn)) {
        TcpSegment tcp = restore_header(h, seg.body);
        if (syn_sent_at_ && now > *syn_sent_at_) rtt_ = now - *syn_sent_at_;
        syn_sent_at_.reset();
        if (find_mss(tcp)) tcp = tx_rewrite_mss(tcp, config_.code);
        out.to_tcp.push_back(std::move(tcp));
        return out;
    }
    if (h.flags.has(Flags::fin) || h.flags.has(Flags::rst)) {
        out.to_tcp.push_back(restore_header(h, seg.body));
        reset();
        return out;
    }
    if (h.flags.has(Flags::ack)) return on_nc_ack(seg, now);
    return out; // half duplex: no payload flows towards the transmitter
}

Transmitter::Outstanding* Transmitter::find(std::uint32_t mu, std::uint8_t nu, std::size_t* index) {
    const auto k = static_cast<std::uint32_t>(config_.code.k);
    for (auto& cw : outstanding_) {
        if (mu < cw.first_mu || mu - cw.first_mu >= k) continue;
        const std::uint32_t offset = mu - cw.first_mu;
        if (nu == 0) {
            *index = offset;
            return &cw;
        }
        if (offset == k - 1 && nu <= emitted_redundancy(config_.code)) {
            *index = k - 1 + nu;
            return &cw;
        }
        return nullptr;
    }
    return nullptr;
}

NcOutput Transmitter::on_nc_ack(const NcSegment& ack, double now, AckOutcome* outcome) {
    AckOutcome result = AckOutcome::Counted;
    NcOutput out;
    std::size_t index = 0;
    Outstanding* cw = find(ack.header.seq, ack.header.symbol, &index);
    if (cw == nullptr || cw->cleared) {
        ++stats_.stale_acks;
        result = AckOutcome::Stale;
    } else if (cw->acked[index]) {
        ++stats_.duplicate_acks;
        result = AckOutcome::Duplicate;
    } else {
        cw->acked[index] = true;
        ++cw->ack_count;
        if (cw->ack_count >= config_.threshold()) {
            result = AckOutcome::SpeculativeAck;
            cw->cleared = true;
            if (!cw->retransmitted) {
                const double sample = now - cw->emitted_at;
                if (!srtt_) {
                    srtt_ = sample;
                    rttvar_ = sample / 2.0;
                } else {
                    rttvar_ = 0.75 * rttvar_ + 0.25 * std::abs(*srtt_ - sample);
                    srtt_ = 0.875 * *srtt_ + 0.125 * sample;
                }
            }
            backoff_ = 0;

            // The path is FIFO, so an older codeword still short of s
            // acknowledgments when a newer one clears has lost too much.
            if (config_.fast_retransmit) {
                for (auto& older : outstanding_) {
                    if (older.cleared || older.last_sent >= cw->last_sent) continue;
                    out.to_ip.insert(out.to_ip.end(), older.segments.begin(), older.segments.end());
                    older.retransmitted = true;
                    older.last_sent = now;
                    older.deadline = now + current_rto();
                    ++stats_.retransmitted_codewords;
                    ++stats_.fast_retransmits;
                }
            }

            // One acknowledgment per TCP segment, for the cleared prefix only.
            while (!outstanding_.empty() && outstanding_.front().cleared) {
                const auto& done = outstanding_.front();
                for (std::uint32_t a = done.tcp_first + 1; a != done.tcp_next + 1; ++a) {
                    TcpSegment tcp_ack;
                    tcp_ack.src_port = ack.header.src_port;
                    tcp_ack.dst_port = ack.header.dst_port;
                    tcp_ack.ack = a;
                    tcp_ack.flags = Flags{Flags::ack};
                    tcp_ack.window = 0xFFFF;
                    out.to_tcp.push_back(std::move(tcp_ack));
                }
                outstanding_.pop_front();
            }
            append(out, pump(now));
        }
    }
    if (outcome != nullptr) *outcome = result;
    return out;
}

NcOutput Transmitter::on_timeout(double now) {
    NcOutput out;
    std::vector<Outstanding*> fired;
    for (auto& cw : outstanding_) {
        if (!cw.cleared && cw.deadline <= now) fired.push_back(&cw);
    }
    if (!fired.empty()) {
        if (current_rto() < config_.rto_cap_factor * rtt_) ++backoff_;
        for (auto* cw : fired) {
            out.to_ip.insert(out.to_ip.end(), cw->segments.begin(), cw->segments.end());
            cw->retransmitted = true;
            cw->last_sent = now;
            cw->deadline = now + current_rto();
            ++stats_.retransmitted_codewords;
        }
    }
    append(out, pump(now));
    return out;
}

std::optional<double> Transmitter::next_deadline() const {
    std::optional<double> next;
    for (const auto& cw : outstanding_) {
        if (!cw.cleared && (!next || cw.deadline < *next)) next = cw.deadline;
    }
    if (!pending_.empty() && pending_.size() < config_.code.k && can_emit()) {
        const double flush_at = last_tcp_arrival_ + config_.flush_delay;
        if (!next || flush_at < *next) next = flush_at;
    }
    return next;
}

NcOutput Transmitter::pump(double now) {
    NcOutput out;
    const auto k = config_.code.k;
    while (pending_.size() >= k && can_emit()) {
        auto block = emit_block(k, now);
        out.to_ip.insert(out.to_ip.end(), block.begin(), block.end());
    }
    if (!pending_.empty() && pending_.size() < k && can_emit() &&
        now >= last_tcp_arrival_ + config_.flush_delay) {
        ++stats_.flushes;
        auto block = emit_block(pending_.size(), now);
        out.to_ip.insert(out.to_ip.end(), block.begin(), block.end());
    }
    return out;
}

std::vector<NcSegment> Transmitter::emit_block(std::size_t real, double now) {
    const auto& code = config_.code;
    const std::uint32_t first_mu = pending_.front().seq + seq_shift_;
    const std::uint16_t src = pending_.front().src_port;
    const std::uint16_t dst = pending_.front().dst_port;

    Outstanding cw;
    cw.first_mu = first_mu;
    cw.segments.reserve(code.n);
    std::vector<Bytes> symbols;
    symbols.reserve(code.k);

    for (std::size_t i = 0; i < real; ++i) {
        TcpSegment seg = std::move(pending_.front());
        pending_.pop_front();
        auto [hdr, residual] = strip_header(seg);
        hdr.seq = seg.seq + seq_shift_;
        if (hdr.seq != first_mu + i) throw std::logic_error("non-consecutive block at the NC transmitter");
        if (residual.size() + block_length_prefix > code.segment_size)
            throw Error(ErrorCode::LengthMismatch, "TCP segment exceeds the negotiated MSS");
        Bytes symbol(code.segment_size, 0);
        symbol[0] = static_cast<std::uint8_t>(residual.size() >> 8);
        symbol[1] = static_cast<std::uint8_t>(residual.size());
        std::copy(residual.begin(), residual.end(), symbol.begin() + block_length_prefix);
        symbols.push_back(std::move(symbol));
        cw.segments.push_back(NcSegment{std::move(hdr), std::move(residual)});
        if (i == 0) cw.tcp_first = seg.seq;
        cw.tcp_next = seg.seq + 1;
    }
    for (std::size_t i = real; i < code.k; ++i) {
        NcHeader hdr{src, dst, static_cast<std::uint32_t>(first_mu + i), 0, Flags{}, Bytes{nc_option_filler}};
        cw.segments.push_back(NcSegment{std::move(hdr), {}});
        symbols.emplace_back(code.segment_size, 0);
        ++seq_shift_;
        ++stats_.fillers;
    }

    auto coded = codec_.encode(symbols);
    const auto last_mu = static_cast<std::uint32_t>(first_mu + code.k - 1);
    for (std::size_t r = 0; r < emitted_redundancy(code); ++r) {
        NcHeader hdr{src, dst, last_mu, static_cast<std::uint8_t>(r + 1), Flags{}, {}};
        cw.segments.push_back(NcSegment{std::move(hdr), std::move(coded[code.k + r])});
    }

    cw.acked.assign(code.k + emitted_redundancy(code), false);
    cw.emitted_at = now;
    cw.last_sent = now;
    cw.deadline = now + current_rto();
    ++stats_.codewords;
    auto emitted = cw.segments;
    outstanding_.push_back(std::move(cw));
    return emitted;
}

// ------------------------------------------------------------------- receiver

Receiver::Receiver(NcConfig config) : config_((validate(config), config)), codec_(config_.code) {}

void Receiver::reset() {
    connected_ = false;
    local_port_ = 0;
    remote_port_ = 0;
    base_mu_ = 0;
    next_codeword_ = 0;
    seq_shift_ = 0;
    pool_.clear();
}

bool Receiver::in_initial_state() const {
    return !connected_ && local_port_ == 0 && remote_port_ == 0 && base_mu_ == 0 && next_codeword_ == 0 &&
           seq_shift_ == 0 && pool_.empty();
}

std::size_t Receiver::buffered() const {
    const auto it = pool_.find(next_codeword_);
    return it == pool_.end() ? 0 : it->second.count;
}

NcOutput Receiver::on_nc_segment(const NcSegment& seg) {
    const auto& h = seg.header;
    const auto& code = config_.code;
    NcOutput out;

    if (h.flags.has(Flags::syn)) {
        if (!connected_ || base_mu_ != h.seq + 1) {
            reset();
            connected_ = true;
            base_mu_ = h.seq + 1;
            local_port_ = h.dst_port;
            remote_port_ = h.src_port;
        }
        out.to_tcp.push_back(restore_header(h, seg.body));
        return out;
    }
    if (h.flags.has(Flags::fin) || h.flags.has(Flags::rst)) {
        out.to_tcp.push_back(restore_header(h, seg.body));
        reset();
        return out;
    }
    if (h.flags.has(Flags::ack)) return out;

    ++stats_.data_segments;
    out.to_ip.push_back(NcSegment{NcHeader{h.dst_port, h.src_port, h.seq, h.symbol, Flags{Flags::ack}, {}}, {}});
    ++stats_.acks_sent;

    if (!connected_ || h.seq < base_mu_) {
        ++stats_.stale;
        return out;
    }
    const std::uint32_t rel = h.seq - base_mu_;
    const std::uint64_t codeword = rel / code.k;
    const std::size_t offset = rel % code.k;
    std::size_t index = 0;
    if (h.symbol == 0) {
        index = offset;
    } else if (offset == code.k - 1 && h.symbol <= emitted_redundancy(code)) {
        index = code.k - 1 + h.symbol;
    } else {
        ++stats_.stale;
        return out;
    }
    if (codeword < next_codeword_) {
        ++stats_.stale;
        return out;
    }
    if (codeword >= next_codeword_ + config_.reorder_pool) {
        ++stats_.beyond_pool;
        return out;
    }

    Bytes symbol;
    if (index < code.k) {
        if (is_filler(h)) {
            symbol.assign(code.segment_size, 0);
        } else {
            if (seg.body.size() + block_length_prefix > code.segment_size) {
                ++stats_.stale;
                return out;
            }
            symbol.assign(code.segment_size, 0);
            symbol[0] = static_cast<std::uint8_t>(seg.body.size() >> 8);
            symbol[1] = static_cast<std::uint8_t>(seg.body.size());
            std::copy(seg.body.begin(), seg.body.end(), symbol.begin() + block_length_prefix);
        }
    } else {
        if (seg.body.size() != code.segment_size) {
            ++stats_.stale;
            return out;
        }
        symbol = seg.body;
    }

    auto& slot = pool_[codeword];
    if (slot.symbols.empty()) slot.symbols.resize(code.n);
    if (slot.symbols[index]) {
        ++stats_.duplicates;
        return out;
    }
    slot.symbols[index] = std::move(symbol);
    ++slot.count;
    deliver_ready(out);
    return out;
}

void Receiver::deliver_ready(NcOutput& out) {
    const auto& code = config_.code;
    for (auto it = pool_.find(next_codeword_); it != pool_.end() && it->second.count >= code.k;
         it = pool_.find(next_codeword_)) {
        auto& symbols = it->second.symbols;
        const bool systematic =
            std::all_of(symbols.begin(), symbols.begin() + static_cast<std::ptrdiff_t>(code.k), [](const auto& s) { return s.has_value(); });
        std::vector<Bytes> info;
        if (systematic) {
            for (std::size_t i = 0; i < code.k; ++i) info.push_back(std::move(*symbols[i]));
        } else {
            std::vector<std::pair<std::size_t, Bytes>> received;
            for (std::size_t i = 0; i < symbols.size(); ++i) {
                if (symbols[i]) received.emplace_back(i, std::move(*symbols[i]));
            }
            for (std::size_t i = 0; i < code.k; ++i) stats_.reconstructed_segments += symbols[i] ? 0 : 1;
            info = codec_.decode(received);
        }

        const std::uint32_t first_mu = base_mu_ + static_cast<std::uint32_t>(next_codeword_ * code.k);
        std::uint32_t fillers = 0;
        for (std::size_t i = 0; i < code.k; ++i) {
            const auto& sym = info[i];
            const std::size_t len = static_cast<std::size_t>(sym[0] << 8 | sym[1]);
            if (len == 0) {
                ++fillers;
                continue;
            }
            if (len + block_length_prefix > sym.size()) throw Error(ErrorCode::MalformedBody, "decoded length out of range");
            NcHeader hdr{remote_port_, local_port_, static_cast<std::uint32_t>(first_mu + i - seq_shift_), 0, Flags{}, {}};
            out.to_tcp.push_back(
                restore_header(hdr, std::span<const std::uint8_t>(sym.data() + block_length_prefix, len)));
        }
        seq_shift_ += fillers;
        pool_.erase(it);
        ++next_codeword_;
        ++stats_.decoded_codewords;
    }
}

NcOutput Receiver::on_tcp_segment(const TcpSegment& seg) {
    NcOutput out;
    if (rx_discard_tcp_ack(seg)) {
        ++stats_.dropped_tcp_acks;
        return out;
    }
    out.to_ip.push_back(passthrough(seg));
    if (seg.flags.has(Flags::rst) || seg.flags.has(Flags::fin)) reset();
    return out;
}

bool rx_discard_tcp_ack(const TcpSegment& seg) {
    if (!seg.payload.empty())
        throw Error(ErrorCode::UnexpectedData, "receiver-side TCP sent payload under the half-duplex assumption");
    return !seg.flags.has(Flags::syn) && !seg.flags.has(Flags::fin) && !seg.flags.has(Flags::rst);
}

} // namespace ncsim
