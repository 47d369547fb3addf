#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "mwlab/errors.hpp"
#include "mwlab/parallel.hpp"

using namespace mwcli;

namespace {

struct Options {
    std::string config;
    std::string out;
    std::string format = "json";
    std::optional<std::uint64_t> seed;
    int jobs = 1;
    std::optional<double> tol;
    std::vector<std::string> suites;
    std::vector<std::string> inputs;
};

ExperimentConfig load(const Options& o) {
    if (o.config.empty()) throw ConfigError("--config", "a config file is required");
    ExperimentConfig c = load_config(o.config);
    if (o.seed) c.seed = *o.seed;
    if (o.tol) {
        if (!(*o.tol > 0.0)) throw ConfigError("--tol", "must be positive");
        c.quadrature.rel_tol = *o.tol;
    }
    return c;
}

json read_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, "cannot open report");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path, e.what());
    }
}

void emit(const Options& o, const json& report) {
    const std::string text = o.format == "csv" ? to_csv(report) : report.dump(2) + "\n";
    if (o.out.empty() || o.out == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(o.out);
    if (!f) throw ConfigError("--out", "cannot write " + o.out);
    f << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mwlab: numerical experiments with matrix weights"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* s, bool with_config) {
        if (with_config) {
            s->add_option("--config", o.config, "experiment config (JSON)")->required();
            s->add_option("--seed", o.seed, "override the config seed");
            s->add_option("--tol", o.tol, "override quadrature.tol");
        }
        s->add_option("--out", o.out, "output path (default stdout)");
        s->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
        s->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
    };
    CLI::App* ch = app.add_subcommand("characteristic", "characteristics over the probe family");
    CLI::App* rd = app.add_subcommand("reduce", "reducing operator on one cube");
    CLI::App* vf = app.add_subcommand("verify", "run verification suites");
    CLI::App* rp = app.add_subcommand("report", "merge reports");
    common(ch, true);
    common(rd, true);
    common(vf, true);
    common(rp, false);
    vf->add_option("--suite", o.suites, "suite name (repeatable)");
    rp->add_option("inputs", o.inputs, "report files")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kConfigError;
    }

    mwlab::set_default_jobs(o.jobs);
    const auto start = std::chrono::steady_clock::now();
    try {
        CommandResult r;
        if (*ch) r = cmd_characteristic(load(o));
        if (*rd) r = cmd_reduce(load(o));
        if (*vf) r = cmd_verify(load(o), o.suites);
        if (*rp) {
            std::vector<json> docs;
            for (const std::string& p : o.inputs) docs.push_back(read_report(p));
            r = cmd_report(docs, o.inputs);
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        r.report["timing"] = {{"seconds", secs}, {"jobs", o.jobs}};
        emit(o, r.report);
        return r.exit_code;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const mwlab::NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumericFailure;
    } catch (const mwlab::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    }
}
