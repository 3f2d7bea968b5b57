#pragma once

// Detection events and time-ordered event streams: the interchange format
// between the Monte Carlo chain and the correlation estimators. Timestamps
// are integer nanoseconds since run start. Origin tags record where a photon
// came from for diagnostics; estimators never read them.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qfc {

enum class Channel : std::uint8_t { herald = 0, unconverted = 1, converted = 2 };
enum class Origin : std::uint8_t {
    pair = 0,              // photon from the input light field
    background_mode = 1,   // uncorrelated signal-arm cavity mode
    conversion_noise = 2,  // parametric noise generated in the waveguide
    dark = 3,              // detector dark count
};

inline const char* to_string(Channel c) {
    switch (c) {
        case Channel::herald: return "herald";
        case Channel::unconverted: return "unconverted";
        case Channel::converted: return "converted";
    }
    throw std::invalid_argument("unknown channel");
}

inline const char* to_string(Origin o) {
    switch (o) {
        case Origin::pair: return "pair";
        case Origin::background_mode: return "background-mode";
        case Origin::conversion_noise: return "conversion-noise";
        case Origin::dark: return "dark";
    }
    throw std::invalid_argument("unknown origin");
}

inline Channel channel_from_string(std::string_view s) {
    if (s == "herald") return Channel::herald;
    if (s == "unconverted") return Channel::unconverted;
    if (s == "converted") return Channel::converted;
    throw std::invalid_argument("unknown channel name: " + std::string(s));
}

inline Origin origin_from_string(std::string_view s) {
    if (s == "pair") return Origin::pair;
    if (s == "background-mode") return Origin::background_mode;
    if (s == "conversion-noise") return Origin::conversion_noise;
    if (s == "dark") return Origin::dark;
    throw std::invalid_argument("unknown origin name: " + std::string(s));
}

struct DetectionEvent {
    std::uint64_t timestamp_ns = 0;
    Channel channel = Channel::herald;
    Origin origin = Origin::pair;

    friend bool operator==(const DetectionEvent&, const DetectionEvent&) = default;
};

struct EventStream {
    Channel channel = Channel::herald;
    std::uint64_t duration_ns = 0;
    std::vector<DetectionEvent> events;

    std::size_t size() const { return events.size(); }
    bool empty() const { return events.empty(); }
    double duration_s() const { return static_cast<double>(duration_ns) * 1e-9; }

    bool is_sorted() const {
        return std::is_sorted(events.begin(), events.end(),
                              [](const DetectionEvent& a, const DetectionEvent& b) {
                                  return a.timestamp_ns < b.timestamp_ns;
                              });
    }

    /// Enforces the stream invariants: non-decreasing timestamps inside the
    /// run duration, every event on the stream's channel.
    void validate() const {
        std::uint64_t prev = 0;
        for (const auto& e : events) {
            if (e.channel != channel)
                throw std::invalid_argument("EventStream: event channel mismatch");
            if (e.timestamp_ns < prev)
                throw std::invalid_argument("EventStream: timestamps not ordered");
            if (e.timestamp_ns >= duration_ns)
                throw std::invalid_argument("EventStream: timestamp beyond duration");
            prev = e.timestamp_ns;
        }
    }

    void sort() {
        std::stable_sort(events.begin(), events.end(),
                         [](const DetectionEvent& a, const DetectionEvent& b) {
                             return a.timestamp_ns < b.timestamp_ns;
                         });
    }
};

/// Ordered merge of two streams on the same channel.
inline EventStream merge_streams(const EventStream& a, const EventStream& b) {
    if (a.channel != b.channel)
        throw std::invalid_argument("merge_streams: channel mismatch");
    EventStream out;
    out.channel = a.channel;
    out.duration_ns = std::max(a.duration_ns, b.duration_ns);
    out.events.resize(a.events.size() + b.events.size());
    std::merge(a.events.begin(), a.events.end(), b.events.begin(), b.events.end(),
               out.events.begin(),
               [](const DetectionEvent& x, const DetectionEvent& y) {
                   return x.timestamp_ns < y.timestamp_ns;
               });
    return out;
}

// --- serialization ---------------------------------------------------------
// CSV: header "channel,timestamp_ns,origin", one event per row.
// Binary: packed records of little-endian u64 timestamp, u8 channel, u8
// origin. Neither form carries stream metadata; readers take it as arguments.

inline void write_csv(std::ostream& os, const EventStream& s) {
    os << "channel,timestamp_ns,origin\n";
    for (const auto& e : s.events)
        os << to_string(e.channel) << ',' << e.timestamp_ns << ','
           << to_string(e.origin) << '\n';
}

inline void write_csv(const std::string& path, const EventStream& s) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for write: " + path);
    write_csv(os, s);
}

inline EventStream read_csv(std::istream& is, std::uint64_t duration_ns) {
    EventStream s;
    s.duration_ns = duration_ns;
    std::string line;
    if (!std::getline(is, line) || line != "channel,timestamp_ns,origin")
        throw std::runtime_error("event CSV: missing or bad header");
    bool first = true;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string ch, ts, orig;
        if (!std::getline(row, ch, ',') || !std::getline(row, ts, ',') ||
            !std::getline(row, orig))
            throw std::runtime_error("event CSV: malformed row: " + line);
        DetectionEvent e;
        e.channel = channel_from_string(ch);
        e.timestamp_ns = std::stoull(ts);
        e.origin = origin_from_string(orig);
        if (first) {
            s.channel = e.channel;
            first = false;
        }
        s.events.push_back(e);
    }
    s.validate();
    return s;
}

inline EventStream read_csv(const std::string& path, std::uint64_t duration_ns) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open: " + path);
    return read_csv(is, duration_ns);
}

inline void write_binary(std::ostream& os, const EventStream& s) {
    for (const auto& e : s.events) {
        unsigned char rec[10];
        for (int i = 0; i < 8; ++i)
            rec[i] = static_cast<unsigned char>((e.timestamp_ns >> (8 * i)) & 0xFF);
        rec[8] = static_cast<unsigned char>(e.channel);
        rec[9] = static_cast<unsigned char>(e.origin);
        os.write(reinterpret_cast<const char*>(rec), sizeof rec);
    }
}

inline void write_binary(const std::string& path, const EventStream& s) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for write: " + path);
    write_binary(os, s);
}

inline EventStream read_binary(std::istream& is, Channel channel,
                               std::uint64_t duration_ns) {
    EventStream s;
    s.channel = channel;
    s.duration_ns = duration_ns;
    unsigned char rec[10];
    while (is.read(reinterpret_cast<char*>(rec), sizeof rec)) {
        DetectionEvent e;
        e.timestamp_ns = 0;
        for (int i = 0; i < 8; ++i)
            e.timestamp_ns |= static_cast<std::uint64_t>(rec[i]) << (8 * i);
        e.channel = static_cast<Channel>(rec[8]);
        e.origin = static_cast<Origin>(rec[9]);
        s.events.push_back(e);
    }
    if (is.gcount() != 0) throw std::runtime_error("event binary: truncated record");
    s.validate();
    return s;
}

inline EventStream read_binary(const std::string& path, Channel channel,
                               std::uint64_t duration_ns) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open: " + path);
    return read_binary(is, channel, duration_ns);
}

}  // namespace qfc
