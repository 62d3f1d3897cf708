#pragma once

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ksa/fuzz.hpp"
#include "ksa/oracle.hpp"
#include "ksa/report.hpp"
#include "ksa/scenario.hpp"

namespace ksa::cli {

enum ExitCode : int { Pass = 0, Violation = 1, UsageError = 2 };

enum class LogLevel { Quiet, Info, Trace };

/// Reads KSA_LOG_LEVEL; unset means info.
inline LogLevel log_level_from_env(std::ostream& err) {
    const char* raw = std::getenv("KSA_LOG_LEVEL");
    if (!raw) return LogLevel::Info;
    const std::string s(raw);
    if (s == "quiet") return LogLevel::Quiet;
    if (s == "info") return LogLevel::Info;
    if (s == "trace") return LogLevel::Trace;
    err << "warning: unknown KSA_LOG_LEVEL '" << s << "', using info\n";
    return LogLevel::Info;
}

class Logger {
public:
    Logger(LogLevel level, std::ostream& err) : level_(level), err_(err) {}
    void info(const std::string& msg) const {
        if (level_ >= LogLevel::Info) err_ << "[info] " << msg << "\n";
    }
    void trace(const std::string& msg) const {
        if (level_ >= LogLevel::Trace) err_ << "[trace] " << msg << "\n";
    }

private:
    LogLevel level_;
    std::ostream& err_;
};

namespace detail {

inline bool emit(const std::string& text, const std::string& out_path, std::ostream& out, std::ostream& err) {
    if (out_path.empty()) {
        out << text;
        return true;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) {
        err << "error: cannot write " << out_path << "\n";
        return false;
    }
    f << text;
    return static_cast<bool>(f);
}

inline std::string render(const ordered_json& j) { return j.dump(2) + "\n"; }

}  // namespace detail

/// `run`: executes one scenario file and reports every applicable verdict.
inline int cmd_run(const std::string& path, std::optional<std::uint64_t> seed, const std::string& out_path,
                   bool json, std::ostream& out, std::ostream& err, const Logger& log) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        err << "error: cannot read " << path << "\n";
        return UsageError;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    Scenario sc;
    try {
        sc = parse_scenario(buf.str());
    } catch (const ScenarioError& e) {
        err << path << ": " << e.what() << "\n";
        return UsageError;
    }
    if (seed) sc.seed = *seed;
    log.info("running " + path + " (" + std::string(to_string(sc.cfg.protocol)) + ")");
    ScenarioOutcome outcome;
    try {
        outcome = execute(sc);
    } catch (const std::exception& e) {
        err << path << ": " << e.what() << "\n";
        return UsageError;
    }
    for (const auto& v : outcome.verdicts) log.trace(v.property + (v.pass ? " pass" : " FAIL"));
    const std::string text = json ? detail::render(run_report(outcome)) : run_report_text(outcome);
    if (!detail::emit(text, out_path, out, err)) return UsageError;
    return outcome.passed() ? Pass : Violation;
}

/// `fuzz`: a seeded campaign of random runs.
inline int cmd_fuzz(const FuzzOptions& options, const std::string& out_path, bool json, std::ostream& out,
                    std::ostream& err, const Logger& log) {
    if (auto e = validate_config({options.n, options.t, options.protocol})) {
        err << "error: " << *e << "\n";
        return UsageError;
    }
    log.info("fuzzing " + std::string(to_string(options.protocol)) + " n=" + std::to_string(options.n) +
             " t=" + std::to_string(options.t) + " runs=" + std::to_string(options.runs));
    const auto summary = fuzz(options);
    log.info(std::to_string(summary.violations) + " violating runs");
    const std::string text = json ? detail::render(to_json(summary)) : fuzz_report_text(summary);
    if (!detail::emit(text, out_path, out, err)) return UsageError;
    return summary.passed() ? Pass : Violation;
}

/// `oracle`: exhaustive enumeration, refused when the space exceeds the bound.
inline int cmd_oracle(OracleTarget target, std::size_t n, std::size_t t, std::size_t bound,
                      const std::string& out_path, bool json, std::ostream& out, std::ostream& err,
                      const Logger& log) {
    OracleOptions options;
    options.bound = bound;
    log.info("oracle " + std::string(to_string(target)) + " n=" + std::to_string(n) + " t=" + std::to_string(t));
    const auto summary = oracle_enumerate(target, n, t, options);
    const std::string text = json ? detail::render(to_json(summary)) : oracle_report_text(summary);
    if (!detail::emit(text, out_path, out, err)) return UsageError;
    if (summary.refused) {
        err << "refused: estimated " << static_cast<std::uint64_t>(summary.estimate) << " runs (bound " << bound
            << ")\n";
        return UsageError;
    }
    return summary.passed() ? Pass : Violation;
}

/// Entry point of the ksa-lab tool.
inline int main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Simulation lab for k-set agreement protocols"};
    app.require_subcommand(1);

    std::string format = "text", out_path;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out", out_path, "Write the report to this file");
        sub->add_option("--format", format, "Report format")->check(CLI::IsMember({"text", "json"}));
    };

    auto* run = app.add_subcommand("run", "Execute a scenario file");
    std::string scenario_path;
    std::optional<std::uint64_t> run_seed_opt;
    run->add_option("scenario", scenario_path, "Scenario file")->required();
    run->add_option("--seed", run_seed_opt, "Override the scenario seed");
    add_common(run);

    auto* fz = app.add_subcommand("fuzz", "Run a seeded random campaign");
    FuzzOptions fo;
    std::string protocol_name;
    fz->add_option("protocol", protocol_name, "two_round | trb_optimal | async_snapshot")
        ->required()
        ->check(CLI::IsMember({"two_round", "trb_optimal", "async_snapshot"}));
    fz->add_option("n", fo.n)->required();
    fz->add_option("t", fo.t)->required();
    fz->add_option("--runs", fo.runs, "Number of runs")->capture_default_str();
    fz->add_option("--seed", fo.seed, "Campaign seed")->capture_default_str();
    fz->add_option("--workers", fo.workers, "Worker threads (0: all cores)");
    add_common(fz);

    auto* orc = app.add_subcommand("oracle", "Exhaustive check of a small instance");
    std::string target_name;
    std::size_t on = 0, ot = 0, bound = OracleOptions{}.bound;
    orc->add_option("target", target_name, "trb | two_round | trb_optimal | async_snapshot")
        ->required()
        ->check(CLI::IsMember({"trb", "two_round", "trb_optimal", "async_snapshot"}));
    orc->add_option("n", on)->required();
    orc->add_option("t", ot)->required();
    orc->add_option("--bound", bound, "Largest number of runs to attempt")->capture_default_str();
    add_common(orc);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? Pass : UsageError;
    }

    const Logger log(log_level_from_env(err), err);
    const bool json = format == "json";
    try {
        if (run->parsed()) return cmd_run(scenario_path, run_seed_opt, out_path, json, out, err, log);
        if (fz->parsed()) {
            fo.protocol = *parse_protocol(protocol_name);
            return cmd_fuzz(fo, out_path, json, out, err, log);
        }
        return cmd_oracle(*parse_oracle_target(target_name), on, ot, bound, out_path, json, out, err, log);
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return UsageError;
    }
}

}  // namespace ksa::cli
