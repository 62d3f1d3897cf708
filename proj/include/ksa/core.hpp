#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ksa {

/// Index of a simulated process, in [0, n).
struct ProcessId {
    std::size_t index = 0;

    friend constexpr auto operator<=>(const ProcessId&, const ProcessId&) = default;
};

inline std::ostream& operator<<(std::ostream& os, ProcessId p) { return os << 'p' << p.index; }

/// A proposable value, or one of the two sentinels that flow through views and
/// decisions: Bottom (no value / no basis to decide) and SenderFaulty (a TRB
/// instance whose sender was detected faulty).
///
/// Ordering is canonical: every Domain value sorts before Bottom, Bottom before
/// SenderFaulty, and Domain values are ordered by their token.
class Value {
public:
    enum class Kind : std::uint8_t { Domain, Bottom, SenderFaulty };

    constexpr Value() = default;

    static constexpr Value domain(std::int64_t token) { return Value{Kind::Domain, token}; }
    static constexpr Value bottom() { return Value{Kind::Bottom, 0}; }
    static constexpr Value sender_faulty() { return Value{Kind::SenderFaulty, 0}; }

    constexpr Kind kind() const { return kind_; }
    constexpr bool is_domain() const { return kind_ == Kind::Domain; }
    constexpr bool is_bottom() const { return kind_ == Kind::Bottom; }
    constexpr bool is_sender_faulty() const { return kind_ == Kind::SenderFaulty; }

    std::int64_t token() const {
        if (!is_domain()) throw std::logic_error("token() on a sentinel value");
        return token_;
    }

    friend constexpr auto operator<=>(const Value&, const Value&) = default;

private:
    constexpr Value(Kind k, std::int64_t token) : kind_(k), token_(token) {}

    Kind kind_ = Kind::Bottom;
    std::int64_t token_ = 0;
};

inline std::string to_string(const Value& v) {
    switch (v.kind()) {
        case Value::Kind::Domain: return std::to_string(v.token());
        case Value::Kind::Bottom: return "bot";
        case Value::Kind::SenderFaulty: return "SF";
    }
    return "?";
}

inline std::ostream& operator<<(std::ostream& os, const Value& v) { return os << to_string(v); }

/// Inverse of to_string; nullopt when the text is neither an integer nor a sentinel name.
inline std::optional<Value> parse_value(std::string_view text) {
    if (text == "bot" || text == "bottom") return Value::bottom();
    if (text == "SF") return Value::sender_faulty();
    if (text.empty()) return std::nullopt;
    std::size_t pos = 0;
    try {
        const std::string s(text);
        const long long token = std::stoll(s, &pos);
        if (pos != s.size()) return std::nullopt;
        return Value::domain(token);
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

/// n-slot vector of per-process values; slots start at Bottom.
using ViewVector = std::vector<Value>;

enum class Protocol { TwoRound, TrbOptimal, AsyncSnapshot };

inline std::string_view to_string(Protocol p) {
    switch (p) {
        case Protocol::TwoRound: return "two_round";
        case Protocol::TrbOptimal: return "trb_optimal";
        case Protocol::AsyncSnapshot: return "async_snapshot";
    }
    return "?";
}

inline std::optional<Protocol> parse_protocol(std::string_view text) {
    if (text == "two_round") return Protocol::TwoRound;
    if (text == "trb_optimal") return Protocol::TrbOptimal;
    if (text == "async_snapshot") return Protocol::AsyncSnapshot;
    return std::nullopt;
}

struct SystemConfig {
    std::size_t n = 1;
    std::size_t t = 0;
    Protocol protocol = Protocol::TwoRound;

    friend bool operator==(const SystemConfig&, const SystemConfig&) = default;
};

/// Returns a diagnostic naming the violated constraint, or nullopt if cfg is valid.
inline std::optional<std::string> validate_config(const SystemConfig& cfg) {
    if (cfg.n < 1) return "n >= 1 required";
    if (cfg.t >= cfg.n) return "t < n required";
    if (cfg.protocol == Protocol::AsyncSnapshot && cfg.n <= 2 * cfg.t) return "n > 2t required";
    return std::nullopt;
}

/// Largest number of distinct values the protocol lets correct processes decide.
///
/// TwoRound counts Bottom as a decided value; TrbOptimal never mixes Bottom with
/// other decisions; AsyncSnapshot bounds the distinct non-Bottom decisions.
inline std::size_t compute_k_bound(const SystemConfig& cfg) {
    if (auto err = validate_config(cfg)) throw std::invalid_argument(*err);
    const std::size_t quorum = cfg.n - cfg.t;
    switch (cfg.protocol) {
        case Protocol::TwoRound: return cfg.n / quorum + 1;
        case Protocol::TrbOptimal: return cfg.n / quorum;
        case Protocol::AsyncSnapshot: return quorum / (cfg.n - 2 * cfg.t);
    }
    throw std::invalid_argument("unknown protocol");
}

/// One irrevocable decision. `at` is the round (synchronous) or global step
/// index (asynchronous) at which the decision was taken.
struct DecisionRecord {
    ProcessId pid;
    Value decided;
    std::size_t at = 0;
    bool correct = true;

    friend bool operator==(const DecisionRecord&, const DecisionRecord&) = default;
};

/// State common to every run: what was proposed, who was faulty, what was decided.
struct RunRecord {
    SystemConfig cfg;
    std::vector<Value> initial_values;
    std::vector<bool> faulty;
    std::vector<DecisionRecord> decisions;
    bool budget_exhausted = false;

    bool is_correct(ProcessId p) const { return !faulty.at(p.index); }

    std::optional<Value> decision_of(ProcessId p) const {
        for (const auto& d : decisions)
            if (d.pid == p) return d.decided;
        return std::nullopt;
    }
};

}  // namespace ksa
