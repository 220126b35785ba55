#include "relayim/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <ostream>

namespace relayim::cli {

namespace {

std::string utc_now() {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string fmt(const char* format, double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, value);
    return buf;
}

Structure structure_from(const std::string& s) {
    if (s == "p2p") return Structure::p2p;
    if (s == "serial") return Structure::serial;
    if (s == "parallel") return Structure::parallel;
    if (s == "cr") return Structure::cr_overlay;
    throw UsageError("unknown structure: " + s);
}

Protocol protocol_from(const std::string& s) {
    if (s == "df") return Protocol::df;
    if (s == "af-vg") return Protocol::af_variable;
    if (s == "af-fg") return Protocol::af_fixed;
    throw UsageError("unknown protocol: " + s);
}

RsScheme rs_from(const std::string& s) {
    if (s == "none") return RsScheme::none;
    if (s == "prs") return RsScheme::prs;
    if (s == "bulk") return RsScheme::bulk;
    if (s == "ps") return RsScheme::per_subcarrier;
    throw UsageError("unknown relay-selection scheme: " + s);
}

}  // namespace

std::vector<double> parse_pt_grid(const std::string& spec) {
    double start = 0.0;
    double stop = 0.0;
    double step = 0.0;
    char trailing = 0;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%lf%c", &start, &stop, &step, &trailing) != 3) {
        throw UsageError("power grid must be START:STOP:STEP, got '" + spec + "'");
    }
    if (!(step > 0.0) || start > stop) {
        throw UsageError("power grid needs STEP > 0 and START <= STOP, got '" + spec + "'");
    }
    const auto count = static_cast<std::size_t>((stop - start) / step + 1e-9) + 1;
    std::vector<double> grid(count);
    for (std::size_t i = 0; i < count; ++i) grid[i] = start + static_cast<double>(i) * step;
    return grid;
}

RunManifest parse_args(const std::vector<std::string>& args) {
    CLI::App app{"Monte Carlo link-level simulator for relay-assisted OFDM index modulation"};
    app.set_config("--config", "", "flat `key = value` file mirroring the flag names");

    std::string structure = "p2p";
    std::string protocol = "df";
    std::string rs = "none";
    int hops = 0;  // 0 = default for the chosen structure
    int relays = 1;
    int subcarriers = 4;
    int active = 2;
    int psk = 2;
    double dsd = 10.0;
    double alpha = 2.0;
    std::string pt_db = "0:40:5";
    std::uint64_t trials = 100000;
    std::uint64_t seed = 1;
    int workers = 1;
    std::string out = "-";

    app.add_option("--structure", structure, "network structure")
        ->check(CLI::IsMember({"p2p", "serial", "parallel", "cr"}));
    app.add_option("--protocol", protocol, "forwarding protocol")
        ->check(CLI::IsMember({"df", "af-vg", "af-fg"}));
    app.add_option("--rs", rs, "relay-selection scheme (parallel structure)")
        ->check(CLI::IsMember({"none", "prs", "bulk", "ps"}));
    auto* hops_opt = app.add_option("--hops", hops, "hop count L")->check(CLI::Range(1, 64));
    app.add_option("--relays", relays, "parallel relay count T")->check(CLI::Range(1, 64));
    app.add_option("--subcarriers", subcarriers, "subcarriers per group N")->check(CLI::Range(1, 32));
    app.add_option("--active", active, "active subcarriers K")->check(CLI::Range(1, 32));
    app.add_option("--psk", psk, "PSK order M (power of two)");
    app.add_option("--dsd", dsd, "source-destination distance in meters")
        ->check(CLI::PositiveNumber);
    app.add_option("--alpha", alpha, "path loss exponent")->check(CLI::NonNegativeNumber);
    app.add_option("--pt-db", pt_db, "transmit power grid START:STOP:STEP in dB over noise");
    app.add_option("--trials", trials, "Monte Carlo trials per grid point")
        ->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "master seed for the reproducible stream family");
    app.add_option("--workers", workers, "worker threads (never changes results)")
        ->check(CLI::Range(1, 4096));
    app.add_option("--out", out, "output CSV path, '-' for stdout");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested(app.help());
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    RunManifest manifest;
    manifest.workers = workers;
    manifest.out_path = out;
    manifest.pt_db_spec = pt_db;
    manifest.timestamp = utc_now();

    ScenarioConfig cfg;
    cfg.structure = structure_from(structure);
    cfg.protocol = protocol_from(protocol);
    cfg.rs_scheme = rs_from(rs);
    cfg.hop_count = hops_opt->count() > 0 ? hops : (cfg.structure == Structure::p2p ? 1 : 2);
    cfg.relay_count = relays;
    cfg.n_subcarriers = subcarriers;
    cfg.n_active = active;
    cfg.psk_order = psk;
    cfg.source_dest_distance = dsd;
    cfg.path_loss_exponent = alpha;
    cfg.noise_var = 1.0;
    cfg.outage_threshold = 1.0;
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }

    manifest.spec.config = cfg;
    manifest.spec.pt_grid_db = parse_pt_grid(pt_db);
    manifest.spec.trials_per_point = trials;
    manifest.spec.master_seed = seed;
    return manifest;
}

void emit_csv(const SweepResult& result, const RunManifest& manifest, std::ostream& sink) {
    if (result.points.empty()) {
        throw std::invalid_argument("refusing to emit an empty sweep");
    }
    const ScenarioConfig& cfg = manifest.spec.config;

    // `## ` lines are informational; `# key = value` lines form a config file
    // that reproduces the data section byte-exactly when re-run.
    sink << "## relayim " << manifest.version << "\n";
    sink << "## generated " << manifest.timestamp << "\n";
    sink << "## out " << manifest.out_path << "\n";
    sink << "# structure = " << to_string(cfg.structure) << "\n";
    sink << "# protocol = " << to_string(cfg.protocol) << "\n";
    sink << "# rs = " << to_string(cfg.rs_scheme) << "\n";
    sink << "# hops = " << cfg.hop_count << "\n";
    sink << "# relays = " << cfg.relay_count << "\n";
    sink << "# subcarriers = " << cfg.n_subcarriers << "\n";
    sink << "# active = " << cfg.n_active << "\n";
    sink << "# psk = " << cfg.psk_order << "\n";
    sink << "# dsd = " << fmt("%g", cfg.source_dest_distance) << "\n";
    sink << "# alpha = " << fmt("%g", cfg.path_loss_exponent) << "\n";
    sink << "# pt-db = " << manifest.pt_db_spec << "\n";
    sink << "# trials = " << manifest.spec.trials_per_point << "\n";
    sink << "# seed = " << manifest.spec.master_seed << "\n";
    sink << "# workers = " << manifest.workers << "\n";

    const bool cr = result.points.front().cr_mode;
    sink << "structure,protocol,rs_scheme,L,T,N,K,M,pt_db,trials,bler,bler_ci95,ber,ber_ci95,"
            "op,op_ci95,throughput_bpcu";
    if (cr) sink << ",primary_ber,secondary_ber";
    sink << ",seed\n";

    for (std::size_t i = 0; i < result.points.size(); ++i) {
        const MetricSummary& p = result.points[i];
        sink << to_string(cfg.structure) << ',' << to_string(cfg.protocol) << ','
             << to_string(cfg.rs_scheme) << ',' << cfg.hop_count << ',' << cfg.relay_count << ','
             << cfg.n_subcarriers << ',' << cfg.n_active << ',' << cfg.psk_order << ','
             << fmt("%g", result.pt_grid_db[i]) << ',' << p.trials << ',' << fmt("%.6g", p.bler)
             << ',' << fmt("%.6g", p.bler_ci95) << ',' << fmt("%.6g", p.ber) << ','
             << fmt("%.6g", p.ber_ci95) << ',' << fmt("%.6g", p.outage_prob) << ','
             << fmt("%.6g", p.outage_ci95) << ',' << fmt("%.6g", p.throughput_bpcu);
        if (cr) sink << ',' << fmt("%.6g", p.primary_ber) << ',' << fmt("%.6g", p.secondary_ber);
        sink << ',' << manifest.spec.master_seed << '\n';
    }
}

int run_main(const std::vector<std::string>& args) {
    RunManifest manifest;
    try {
        manifest = parse_args(args);
    } catch (const HelpRequested& help) {
        std::cout << help.what();
        return 0;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    SweepResult result;
    try {
        result = run_sweep(manifest.spec, manifest.workers);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }

    try {
        if (manifest.out_path == "-") {
            emit_csv(result, manifest, std::cout);
            std::cout.flush();
            if (!std::cout) {
                std::cerr << "error: failed writing to stdout\n";
                return kExitIo;
            }
        } else {
            std::ofstream out(manifest.out_path);
            if (!out) {
                std::cerr << "error: cannot open " << manifest.out_path << " for writing\n";
                return kExitIo;
            }
            emit_csv(result, manifest, out);
            out.flush();
            if (!out) {
                std::cerr << "error: failed writing " << manifest.out_path << "\n";
                return kExitIo;
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return 0;
}

}  // namespace relayim::cli
