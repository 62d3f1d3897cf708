#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ksa/report.hpp"
#include "ksa/scenario.hpp"

namespace ksa {

/// Seed of run `index` in a campaign seeded with `seed` (splitmix64 finalizer).
inline std::uint64_t run_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + (index + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

struct FuzzOptions {
    Protocol protocol = Protocol::TwoRound;
    std::size_t n = 3, t = 1;
    std::size_t runs = 1000;
    std::uint64_t seed = 0;
    /// 0: one per hardware thread.
    std::size_t workers = 0;
    /// Failing runs kept in full in the summary.
    std::size_t keep_failures = 10;
};

struct FuzzFailure {
    std::size_t index = 0;
    Scenario scenario;
    ordered_json report;
};

struct FuzzSummary {
    FuzzOptions options;
    std::size_t runs = 0;
    std::size_t violations = 0;
    std::size_t max_distinct = 0;
    std::size_t max_distinct_domain = 0;
    /// property -> {passes, failures}
    std::map<std::string, std::pair<std::size_t, std::size_t>> verdict_counts;
    std::vector<FuzzFailure> failures;

    bool passed() const { return violations == 0; }
};

namespace detail {

struct FuzzResult {
    bool pass = true;
    std::size_t distinct = 0, distinct_domain = 0;
    std::vector<Verdict> verdicts;
    std::optional<FuzzFailure> failure;
};

inline FuzzResult fuzz_one(const FuzzOptions& o, std::size_t index) {
    auto sc = random_scenario(o.protocol, o.n, o.t, run_seed(o.seed, index));
    sc.name = "fuzz#" + std::to_string(index);
    auto outcome = execute(sc, {false});
    FuzzResult r;
    r.pass = outcome.passed();
    r.distinct = decided_values(outcome.base()).size();
    r.distinct_domain = decided_values(outcome.base(), DecisionCount::DomainOnly).size();
    r.verdicts = outcome.verdicts;
    // Failures are re-run with the message log so the report can show it.
    if (!r.pass) r.failure = FuzzFailure{index, sc, run_report(execute(sc))};
    return r;
}

}  // namespace detail

/// Runs a campaign on a worker pool; the summary depends only on the options
/// (results are aggregated by run index).
inline FuzzSummary fuzz(const FuzzOptions& options) {
    if (auto err = validate_config({options.n, options.t, options.protocol})) throw std::invalid_argument(*err);
    std::vector<detail::FuzzResult> results(options.runs);
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    auto work = [&] {
        try {
            for (std::size_t i = next++; i < options.runs; i = next++) results[i] = detail::fuzz_one(options, i);
        } catch (...) {
            std::lock_guard lock(error_mu);
            if (!error) error = std::current_exception();
            next = options.runs;
        }
    };
    std::size_t workers = options.workers ? options.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, std::max<std::size_t>(options.runs, 1));
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (error) std::rethrow_exception(error);

    FuzzSummary s;
    s.options = options;
    s.runs = options.runs;
    for (auto& r : results) {
        if (!r.pass) ++s.violations;
        s.max_distinct = std::max(s.max_distinct, r.distinct);
        s.max_distinct_domain = std::max(s.max_distinct_domain, r.distinct_domain);
        for (const auto& v : r.verdicts) {
            auto& c = s.verdict_counts[v.property];
            (v.pass ? c.first : c.second)++;
        }
        if (r.failure && s.failures.size() < options.keep_failures) s.failures.push_back(std::move(*r.failure));
    }
    return s;
}

inline ordered_json to_json(const FuzzSummary& s) {
    ordered_json j{{"protocol", std::string(to_string(s.options.protocol))},
                   {"n", s.options.n},
                   {"t", s.options.t},
                   {"seed", s.options.seed},
                   {"runs", s.runs},
                   {"violations", s.violations},
                   {"max_distinct", s.max_distinct},
                   {"max_distinct_domain", s.max_distinct_domain}};
    if (flag_n_le_2t({s.options.n, s.options.t, s.options.protocol})) j["flags"] = ordered_json::array({"n_le_2t"});
    ordered_json counts = ordered_json::object();
    for (const auto& [k, c] : s.verdict_counts) counts[k] = {{"pass", c.first}, {"fail", c.second}};
    j["verdicts"] = counts;
    ordered_json failures = ordered_json::array();
    for (const auto& f : s.failures) failures.push_back({{"run", f.index}, {"report", f.report}});
    j["failures"] = failures;
    return j;
}

inline std::string fuzz_report_text(const FuzzSummary& s) {
    std::ostringstream os;
    os << "fuzz: " << to_string(s.options.protocol) << " n=" << s.options.n << " t=" << s.options.t
       << " seed=" << s.options.seed << "\n";
    if (flag_n_le_2t({s.options.n, s.options.t, s.options.protocol})) os << "note: n <= 2t\n";
    os << "runs: " << s.runs << "\n";
    os << "violations: " << s.violations << "\n";
    os << "max distinct: " << s.max_distinct << "\n";
    os << "max distinct domain: " << s.max_distinct_domain << "\n";
    for (const auto& [k, c] : s.verdict_counts) os << "  " << k << ": " << c.first << " pass, " << c.second << " fail\n";
    for (const auto& f : s.failures) {
        os << "failing run " << f.index << ":\n";
        os << "  scenario " << to_json(f.scenario).dump() << "\n";
        for (const auto& v : f.report["verdicts"])
            if (!v["pass"].get<bool>()) os << "  FAIL " << v["property"].get<std::string>() << "\n";
    }
    return os.str();
}

}  // namespace ksa
