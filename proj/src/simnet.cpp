// SPDX-License-Identifier: Apache-2.0

#include "ncsim/simnet.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <optional>

#include "ncsim/tcp_model.hpp"

namespace ncsim {

void Simulator::schedule(double time, EventKind kind, int target, Action action) {
    if (!(time >= now_)) throw Error(ErrorCode::PastEvent, "event scheduled before the current time");
    queue_.push(Event{time, next_seq_++, kind, target, std::move(action)});
}

std::uint64_t Simulator::run_until(double t_end) {
    if (t_end < now_) throw Error(ErrorCode::PastEvent, "run_until before the current time");
    std::uint64_t processed = 0;
    while (!queue_.empty() && queue_.top().time <= t_end) {
        Event ev = queue_.top();
        queue_.pop();
        now_ = ev.time;
        ev.action();
        ++processed;
    }
    now_ = t_end;
    return processed;
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::mt19937_64 stream_rng(std::uint64_t seed, std::string_view name) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char ch : name) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return std::mt19937_64(mix64(seed ^ mix64(h)));
}

std::string_view node_name(Node n) {
    static constexpr std::string_view names[] = {"A1", "A2", "N3", "N4", "S1", "S2"};
    return names[static_cast<int>(n)];
}

Node parse_node(std::string_view name) {
    for (int i = 0; i < 6; ++i) {
        if (node_name(static_cast<Node>(i)) == name) return static_cast<Node>(i);
    }
    throw Error(ErrorCode::ConfigError, "unknown node " + std::string(name));
}

std::size_t Packet::wire_bytes() const {
    constexpr std::size_t ip_header = 20;
    if (const auto* tcp = std::get_if<TcpSegment>(&segment))
        return ip_header + tcp_header_size + tcp->options.size() + tcp->payload.size();
    const auto& nc = std::get<NcSegment>(segment);
    return ip_header + nc_header_size + nc.header.nc_options.size() + nc.body.size();
}

Link::Link(std::string name, LinkParams params, std::uint64_t seed, Simulator& sim, Deliver deliver)
    : name_(std::move(name)), params_(params), rng_(stream_rng(seed, name_)), sim_(sim), deliver_(std::move(deliver)) {}

std::size_t Link::backlog() {
    while (!departures_.empty() && departures_.front() <= sim_.now()) departures_.pop();
    return departures_.size();
}

void Link::transmit(Packet packet) {
    ++stats_.injected;
    // One packet in service plus queue_packets waiting.
    if (backlog() > params_.queue_packets) {
        ++stats_.dropped;
        return;
    }
    const double start = std::max(sim_.now(), busy_until_);
    busy_until_ = start + static_cast<double>(packet.wire_bytes() * 8) / params_.rate_bps;
    departures_.push(busy_until_);
    sim_.schedule(busy_until_ + params_.delay_s, EventKind::PacketArrival, packet.flow,
                  [this, p = std::move(packet)]() mutable {
                      if (uniform01(rng_) < params_.per) {
                          ++stats_.erased;
                          return;
                      }
                      ++stats_.delivered;
                      deliver_(*this, std::move(p));
                  });
}

namespace {

Node next_hop(Node at, Node dst) {
    switch (at) {
    case Node::A1:
    case Node::A2:
        return Node::N3;
    case Node::S1:
    case Node::S2:
        return Node::N4;
    case Node::N3:
        return (dst == Node::S1 || dst == Node::S2) ? Node::N4 : dst;
    case Node::N4:
        return (dst == Node::A1 || dst == Node::A2) ? Node::N3 : dst;
    }
    return dst;
}

// Source application data: byte i of flow f's stream.
std::uint8_t stream_byte(std::uint64_t key, std::uint64_t i) {
    return static_cast<std::uint8_t>(mix64(key + (i >> 3)) >> (8 * (i & 7)));
}

class Network {
public:
    Network(const ScenarioConfig& config, const PacketTrace& trace);
    Metrics run();

private:
    struct Flow {
        int id = 0;
        Node src = Node::A1;
        Node dst = Node::S1;
        double start = 0.0;
        std::uint64_t key = 0;
        TcpSender sender;
        TcpReceiver sink;
        std::optional<Transmitter> tx;
        std::optional<Receiver> rx;
        std::uint64_t app_written = 0;
        std::uint64_t sink_read = 0;
        std::uint64_t tcp_gen = 0;
        std::uint64_t nc_gen = 0;
        std::optional<double> tcp_timer;
        std::optional<double> nc_timer;
        FlowMetrics m;

        Flow(TcpConfig a, TcpConfig b) : sender(a), sink(b) {}
    };

    void send(Flow& f, Node from, Node to, std::variant<TcpSegment, NcSegment> seg);
    void arrive(const Link& via, Node at, Packet p);

    void source_down(Flow& f, const std::vector<TcpSegment>& segs);
    void source_up(Flow& f, const std::vector<TcpSegment>& segs);
    void source_nc(Flow& f, NcOutput out);
    void sink_up(Flow& f, const std::vector<TcpSegment>& segs);
    void refill(Flow& f);
    void rearm(Flow& f);
    void start(Flow& f);

    const ScenarioConfig& config_;
    const PacketTrace& trace_;
    Simulator sim_;
    std::map<std::pair<Node, Node>, std::unique_ptr<Link>> links_;
    std::vector<std::unique_ptr<Flow>> flows_;
};

Network::Network(const ScenarioConfig& config, const PacketTrace& trace) : config_(config), trace_(trace) {
    auto add = [this](Node a, Node b, double rate, double delay, double per) {
        const std::string name = std::string(node_name(a)) + "->" + std::string(node_name(b));
        auto link = std::make_unique<Link>(name, LinkParams{rate, delay, config_.queue_packets, per}, config_.seed, sim_,
                                           [this, b](const Link& via, Packet p) { arrive(via, b, std::move(p)); });
        links_[{a, b}] = std::move(link);
    };
    const double ar = config.access_rate_bps;
    const double ad = config.access_delay_s;
    for (Node a : {Node::A1, Node::A2}) {
        add(a, Node::N3, ar, ad, 0.0);
        add(Node::N3, a, ar, ad, 0.0);
    }
    for (Node s : {Node::S1, Node::S2}) {
        add(Node::N4, s, ar, ad, 0.0);
        add(s, Node::N4, ar, ad, 0.0);
    }
    add(Node::N3, Node::N4, config.bottleneck_rate_bps, config.bottleneck_delay_s, config.per);
    add(Node::N4, Node::N3, config.bottleneck_rate_bps, config.bottleneck_delay_s, config.reverse_per());

    const std::size_t bins = static_cast<std::size_t>(std::floor(config.t_end));
    for (std::size_t i = 0; i < config.flows.size(); ++i) {
        const auto& spec = config.flows[i];
        TcpConfig src;
        src.local_port = static_cast<std::uint16_t>(4000 + i);
        src.remote_port = static_cast<std::uint16_t>(80 + i);
        src.mss_offer = config.mss_offer;
        TcpConfig dst = src;
        std::swap(dst.local_port, dst.remote_port);
        auto f = std::make_unique<Flow>(src, dst);
        f->id = static_cast<int>(i);
        f->src = parse_node(spec.source);
        f->dst = parse_node(spec.sink);
        f->start = spec.start;
        f->key = mix64(config.seed ^ mix64(0x5eed0000 + i));
        if (spec.nc) {
            f->tx.emplace(config.nc);
            f->rx.emplace(config.nc);
        }
        f->m.series.assign(bins, 0.0);
        flows_.push_back(std::move(f));
    }
}

void Network::send(Flow& f, Node from, Node to, std::variant<TcpSegment, NcSegment> seg) {
    Packet p{f.id, from, to, std::move(seg), sim_.now()};
    auto& link = *links_.at({from, next_hop(from, to)});
    if (trace_.on_send) trace_.on_send(link, p, sim_.now());
    link.transmit(std::move(p));
}

void Network::arrive(const Link& via, Node at, Packet p) {
    if (trace_.on_arrive) trace_.on_arrive(via, p, sim_.now());
    if (at != p.dst) {
        auto& link = *links_.at({at, next_hop(at, p.dst)});
        if (trace_.on_send) trace_.on_send(link, p, sim_.now());
        link.transmit(std::move(p));
        return;
    }
    Flow& f = *flows_.at(static_cast<std::size_t>(p.flow));
    if (at == f.dst) {
        if (f.rx) {
            const auto out = f.rx->on_nc_segment(std::get<NcSegment>(p.segment));
            for (const auto& s : out.to_ip) send(f, f.dst, f.src, s);
            sink_up(f, out.to_tcp);
        } else {
            sink_up(f, {std::get<TcpSegment>(p.segment)});
        }
    } else {
        if (f.tx) {
            source_nc(f, f.tx->on_ip_segment(std::get<NcSegment>(p.segment), sim_.now()));
        } else {
            source_up(f, {std::get<TcpSegment>(p.segment)});
        }
        rearm(f);
    }
}

void Network::source_down(Flow& f, const std::vector<TcpSegment>& segs) {
    for (const auto& s : segs) {
        if (f.tx) {
            source_nc(f, f.tx->on_tcp_segment(s, sim_.now()));
        } else {
            send(f, f.src, f.dst, s);
        }
    }
}

void Network::source_nc(Flow& f, NcOutput out) {
    for (auto& s : out.to_ip) send(f, f.src, f.dst, std::move(s));
    source_up(f, out.to_tcp);
}

void Network::source_up(Flow& f, const std::vector<TcpSegment>& segs) {
    for (const auto& s : segs) source_down(f, f.sender.on_segment(s, sim_.now()));
    refill(f);
}

void Network::sink_up(Flow& f, const std::vector<TcpSegment>& segs) {
    const std::uint64_t before = f.sink.stats().delivered_segments;
    for (const auto& s : segs) {
        for (const auto& reply : f.sink.on_segment(s, sim_.now())) {
            if (f.rx) {
                for (const auto& n : f.rx->on_tcp_segment(reply).to_ip) send(f, f.dst, f.src, n);
            } else {
                send(f, f.dst, f.src, reply);
            }
        }
    }
    const std::uint64_t got = f.sink.stats().delivered_segments - before;
    if (got == 0) return;
    const auto bin = static_cast<std::size_t>(std::floor(sim_.now()));
    if (bin < f.m.series.size()) f.m.series[bin] += static_cast<double>(got);
    for (const std::uint8_t b : f.sink.take_delivered()) {
        if (b != stream_byte(f.key, f.sink_read)) ++f.m.payload_mismatches;
        ++f.sink_read;
    }
}

void Network::refill(Flow& f) {
    if (!f.sender.established()) return;
    const std::size_t low = 2 * std::size_t{f.sender.config().rwnd_bytes};
    if (f.sender.unsent_bytes() >= low) return;
    Bytes chunk(low);
    for (auto& b : chunk) b = stream_byte(f.key, f.app_written++);
    source_down(f, f.sender.on_app_data(chunk, sim_.now()));
}

void Network::rearm(Flow& f) {
    auto arm = [this, &f](std::optional<double> want, std::optional<double>& have, std::uint64_t& gen, bool tcp) {
        if (want == have) return;
        have = want;
        const std::uint64_t token = ++gen;
        if (!want) return;
        sim_.schedule(std::max(*want, sim_.now()), EventKind::TimerExpiry, f.id, [this, &f, token, tcp] {
            if (tcp) {
                if (token != f.tcp_gen) return;
                f.tcp_timer.reset();
                std::vector<TcpSegment> out;
                try {
                    out = f.sender.on_timeout(sim_.now());
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::HandshakeTimeout) throw;
                    ++f.m.handshake_failures;
                    out = {f.sender.connect(sim_.now())};
                }
                source_down(f, out);
                refill(f);
            } else {
                if (token != f.nc_gen) return;
                f.nc_timer.reset();
                source_nc(f, f.tx->on_timeout(sim_.now()));
            }
            rearm(f);
        });
    };
    arm(f.sender.next_deadline(), f.tcp_timer, f.tcp_gen, true);
    if (f.tx) arm(f.tx->next_deadline(), f.nc_timer, f.nc_gen, false);
}

void Network::start(Flow& f) {
    source_down(f, {f.sender.connect(sim_.now())});
    rearm(f);
}

Metrics Network::run() {
    for (auto& f : flows_) {
        Flow* raw = f.get();
        sim_.schedule(raw->start, EventKind::AppSend, raw->id, [this, raw] { start(*raw); });
    }
    Metrics m;
    m.events = sim_.run_until(config_.t_end);
    m.duration = config_.t_end;
    m.seed = config_.seed;
    m.config_digest = config_digest(config_);
    const auto first_bin = static_cast<std::size_t>(std::ceil(config_.warmup));
    for (auto& f : flows_) {
        auto fm = f->m;
        const auto& st = f->sender.stats();
        fm.delivered_segments = f->sink.stats().delivered_segments;
        fm.delivered_bytes = f->sink.stats().delivered_bytes;
        fm.sink_duplicates = f->sink.stats().duplicate_segments;
        fm.goodput_bytes_per_s = static_cast<double>(fm.delivered_bytes) / config_.t_end;
        fm.tcp_segments_sent = st.segments_sent;
        fm.tcp_retransmissions = st.retransmissions;
        fm.tcp_timeouts = st.timeouts;
        if (f->tx) {
            fm.nc_codewords = f->tx->stats().codewords;
            fm.nc_retransmitted_codewords = f->tx->stats().retransmitted_codewords;
        }
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t b = first_bin; b < fm.series.size(); ++b, ++n) sum += fm.series[b];
        fm.steady_segs_per_s = n > 0 ? sum / static_cast<double>(n) : 0.0;
        m.flows.push_back(std::move(fm));
    }
    for (const auto& [key, link] : links_) m.links.push_back(LinkMetrics{link->name(), link->stats()});
    return m;
}

} // namespace

Metrics run_scenario(const ScenarioConfig& config) { return run_scenario(config, PacketTrace{}); }

Metrics run_scenario(const ScenarioConfig& config, const PacketTrace& trace) {
    validate(config);
    Network net(config, trace);
    return net.run();
}

} // namespace ncsim
