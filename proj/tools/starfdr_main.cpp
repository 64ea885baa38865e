// Command-line front end: run Monte Carlo experiments to CSV (plus a gnuplot
// script), execute one-shot protocol rounds for debugging, print bit-budget
// tables, and run the built-in selftest.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "starfdr/starfdr.hpp"

namespace {

using namespace starfdr;

std::vector<protocols::Method> parse_methods(const std::vector<std::string>& names) {
    std::vector<protocols::Method> methods;
    for (const std::string& name : names) {
        const auto method = protocols::method_from_name(name);
        if (!method) throw CLI::ValidationError("--methods", "unknown method: " + name);
        methods.push_back(*method);
    }
    return methods;
}

experiments::ExperimentId parse_experiment(const std::string& name) {
    if (name == "exp1") return experiments::ExperimentId::exp1;
    if (name == "exp2") return experiments::ExperimentId::exp2;
    if (name == "exp3") return experiments::ExperimentId::exp3;
    throw CLI::ValidationError("--experiment", "unknown experiment: " + name);
}

experiments::SimulationId parse_simulation(const std::string& name) {
    if (name == "I") return experiments::SimulationId::I;
    if (name == "II") return experiments::SimulationId::II;
    if (name == "III") return experiments::SimulationId::III;
    throw CLI::ValidationError("--simulation", "unknown simulation: " + name);
}

// Flat key=value configuration file ('#' comments allowed). Keys are the long
// option names of `run`.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    auto trim = [](std::string s) {
        const char* ws = " \t\r";
        s.erase(0, s.find_first_not_of(ws));
        const auto end = s.find_last_not_of(ws);
        s.erase(end == std::string::npos ? 0 : end + 1);
        return s;
    };
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error("config line is not key=value: " + trim(line));
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw std::runtime_error("config line is not key=value: " + trim(line));
        }
        entries.emplace_back(key, value);
    }
    return entries;
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string field;
    while (std::getline(ss, field, ',')) {
        if (!field.empty()) out.push_back(field);
    }
    return out;
}

std::vector<StatVector> read_stats_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open input file: " + path);
    std::vector<StatVector> nodes;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> values;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) {
            values.push_back(std::stod(field));
        }
        if (!values.empty()) nodes.emplace_back(std::move(values));
    }
    if (nodes.empty()) throw std::runtime_error("no statistics found in " + path);
    return nodes;
}

void print_decision(const protocols::Decision& decision, const netsim::Transcript& tr) {
    std::size_t total_rejected = 0;
    if (decision.per_node_rejections) {
        for (const auto& set : *decision.per_node_rejections) total_rejected += set.size();
    }
    std::ostringstream head;
    if (decision.threshold_index) {
        head << "K=" << *decision.threshold_index << ", rejected: ";
        head << (total_rejected == 0 ? "none" : std::to_string(total_rejected));
    } else if (decision.global_reject) {
        if (decision.global_pvalue) head << "p=" << *decision.global_pvalue << ", ";
        head << "decision: " << (*decision.global_reject ? "reject" : "accept");
    } else {
        head << "T=";
        if (decision.threshold && std::isfinite(*decision.threshold)) {
            head << *decision.threshold;
        } else {
            head << "inf";
        }
        head << ", rejected: "
             << (total_rejected == 0 ? "none" : std::to_string(total_rejected));
    }
    std::cout << head.str() << '\n';

    if (decision.per_node_rejections) {
        for (std::size_t i = 0; i < decision.per_node_rejections->size(); ++i) {
            std::cout << "node " << i << ": {";
            const auto& set = (*decision.per_node_rejections)[i];
            for (std::size_t j = 0; j < set.size(); ++j) {
                std::cout << (j ? " " : "") << set[j];
            }
            std::cout << "}\n";
        }
    }
    std::cout << "bits: uplink " << tr.total_uplink_bits() << ", downlink "
              << tr.downlink_bits << ", total " << decision.total_bits << '\n';
    std::cout << "transcript:\n";
    tr.write_log(std::cout);
}

// ---------------------------------------------------------------------------
// selftest: compact in-binary invariant suite, one PASS/FAIL line per check
// ---------------------------------------------------------------------------

struct SelfTest {
    int failures = 0;
    void check(const char* name, bool ok) {
        std::cout << (ok ? "PASS" : "FAIL") << ' ' << name << '\n';
        if (!ok) ++failures;
    }
};

// Direct-from-definition references, independent of the library code paths.
stats::SelectionResult brute_bc(const std::vector<double>& values, double alpha) {
    stats::SelectionResult result;
    std::vector<double> grid;
    for (double v : values) {
        if (v != 0.0) grid.push_back(std::abs(v));
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    for (double t : grid) {
        double below = 0, above = 0;
        for (double v : values) {
            below += (v <= -t) ? 1 : 0;
            above += (v >= t) ? 1 : 0;
        }
        const double fdp = (1.0 + below) / std::max(above, 1.0);
        if (fdp <= alpha) {
            result.threshold = t;
            result.fdp_hat = fdp;
            break;
        }
    }
    if (std::isfinite(result.threshold)) {
        for (std::size_t j = 0; j < values.size(); ++j) {
            if (values[j] >= result.threshold) result.rejected.push_back(j);
        }
    }
    return result;
}

std::vector<std::size_t> brute_bh(const std::vector<double>& pvalues, double alpha) {
    const std::size_t n = pvalues.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pvalues[a] < pvalues[b]; });
    std::size_t best = 0;
    for (std::size_t k = 1; k <= n; ++k) {
        if (pvalues[order[k - 1]] <=
            static_cast<double>(k) * alpha / static_cast<double>(n)) {
            best = k;
        }
    }
    std::vector<std::size_t> rejected(order.begin(), order.begin() + best);
    std::sort(rejected.begin(), rejected.end());
    return rejected;
}

int run_selftest() {
    SelfTest t;

    {
        const auto zero = rng::Philox4x32::block({0, 0, 0, 0}, {0, 0});
        const auto ones = rng::Philox4x32::block(
            {0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
            {0xffffffffu, 0xffffffffu});
        t.check("philox4x32-10 known answers",
                zero == rng::Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu,
                                                 0x9b00dbd8u} &&
                    ones == rng::Philox4x32::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u,
                                                     0x6d5451fdu});
    }
    {
        bool ok = true;
        for (double p : {1e-9, 1e-4, 0.01, 0.2, 0.5, 0.8, 0.99, 1.0 - 1e-9}) {
            ok = ok && std::abs(stats::normal_cdf(stats::normal_quantile(p)) - p) < 1e-9;
        }
        t.check("normal quantile/CDF round trip", ok);
    }
    {
        const auto sel = stats::bc_select({5, 4, 3, 2, 1, -1}, 0.25);
        t.check("frozen worked examples",
                std::abs(stats::sign_test_pvalue(1, 5) - 0.1875) < 1e-15 &&
                    sel.threshold == 2.0 && sel.rejected.size() == 4 &&
                    stats::simes_pvalue({0.01, 0.5, 0.9}) == 0.03 &&
                    compression::sample_budget_L(50, 4) == 12);
    }
    {
        rng::Stream s(2024, 0, 0, 7);
        bool ok = true;
        for (int rep = 0; rep < 2000 && ok; ++rep) {
            const std::size_t m = 1 + s.below(8);
            std::vector<double> values(m);
            for (double& v : values) {
                v = static_cast<double>(static_cast<int>(s.below(7))) - 3.0;
            }
            const double alpha = s.uniform(0.05, 0.95);
            const auto got = stats::bc_select(values, alpha);
            const auto want = brute_bc(values, alpha);
            ok = got.threshold == want.threshold && got.rejected == want.rejected;
            if (ok) {
                std::vector<double> ps(m);
                for (double& p : ps) p = s.uniform(0.0, 1.0);
                ok = stats::bh_select(ps, alpha) == brute_bh(ps, alpha);
            }
        }
        t.check("selection procedures match brute force (random)", ok);
    }
    {
        rng::Stream s(99, 0, 0, 8);
        bool ok = true;
        const unsigned k = 16;
        const int draws = 20000;
        std::vector<int> counts(k + 1, 0);
        for (int i = 0; i < draws; ++i) {
            const double q = stats::quantize_pvalue(s.next_unit(), k);
            counts[static_cast<int>(std::lround(q * k))]++;
        }
        int cum = 0;
        for (unsigned j = 0; j <= k && ok; ++j) {
            cum += counts[j];
            const double tt = static_cast<double>(j) / k;
            const double bound = tt + 3.0 * std::sqrt(tt * (1 - tt) / draws);
            ok = static_cast<double>(cum) / draws <= bound + 1e-12;
        }
        t.check("quantized p-values superuniform (k=16)", ok);
    }
    {
        bool ok = true;
        for (std::uint64_t n = 10; n <= 100; n += 10) {
            const std::uint64_t qbits = n * 3;
            const std::uint64_t sbits =
                2ULL * compression::sample_budget_L(n, 4) * ceil_log2(n + 1);
            ok = ok && sbits <= qbits &&
                 static_cast<double>(sbits) >= 0.8 * static_cast<double>(qbits);
        }
        t.check("budget parity on the n-grid (q=4)", ok);
    }
    {
        experiments::DataModel model;
        model.num_nodes = 2;
        model.stats_per_node = 25;
        model.null_only = true;
        model.seed = 11;
        double fdp_sum = 0;
        bool lemma_ok = true;
        const int trials = 400;
        for (int trial = 0; trial < trials; ++trial) {
            const auto nodes = experiments::generate_trial(model, trial);
            const auto decision = protocols::pooled_qbc(nodes, 0.2, 4);
            const auto metrics = experiments::individual_metrics(decision, nodes);
            fdp_sum += metrics.fdp;
            const auto global = protocols::global_pooled_qbc(nodes, 0.2, 4);
            lemma_ok = lemma_ok && (*global.global_reject == (metrics.reject_count > 0));
        }
        const double fdr = fdp_sum / trials;
        const double se = std::sqrt(0.25 / trials);
        t.check("pooled q-BC null FDR within bound", fdr <= 0.2 + 3 * se);
        t.check("global rejection equals nonempty selection", lemma_ok);
    }
    {
        experiments::RunConfig config;
        config.experiment = experiments::ExperimentId::exp1;
        config.simulation = experiments::SimulationId::I;
        config.trials = 30;
        config.seed = 5;
        config.grid = std::vector<double>{20};
        std::ostringstream a, b;
        experiments::write_csv(a, experiments::run_experiment(config));
        experiments::write_csv(b, experiments::run_experiment(config));
        t.check("experiment runs are deterministic", a.str() == b.str());
    }

    std::cout << (t.failures == 0 ? "selftest: all checks passed"
                                  : "selftest: FAILURES PRESENT")
              << '\n';
    return t.failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"starfdr: communication-efficient distribution-free testing "
                 "over a star network"};
    app.require_subcommand(1);

    // --- run ---
    auto* run_cmd = app.add_subcommand("run", "Run a Monte Carlo experiment, write CSV");
    std::string experiment = "exp1";
    std::string simulation = "I";
    std::vector<std::string> method_names;
    std::size_t trials = 10000;
    std::uint64_t seed = 0;
    unsigned jobs = 1;
    std::string output;
    std::string config_path;
    std::optional<std::size_t> opt_nodes, opt_stats;
    std::optional<double> opt_mu, opt_alpha;
    std::optional<unsigned> opt_q, opt_L, opt_k;
    std::vector<double> grid;
    run_cmd->add_option("--config", config_path,
                        "Read options from a flat key=value file (flags win)");
    run_cmd->add_option("--experiment", experiment, "exp1 | exp2 | exp3")
        ->check(CLI::IsMember({"exp1", "exp2", "exp3"}));
    run_cmd->add_option("--simulation", simulation, "I | II | III")
        ->check(CLI::IsMember({"I", "II", "III"}));
    run_cmd->add_option("--methods", method_names, "Method subset (comma separated)")
        ->delimiter(',');
    run_cmd->add_option("--trials", trials, "Monte Carlo trials per grid point");
    run_cmd->add_option("--seed", seed, "RNG seed");
    run_cmd->add_option("--jobs", jobs, "Worker threads for the trial loop");
    run_cmd->add_option("-o,--output", output, "Output CSV path");
    run_cmd->add_option("--N", opt_nodes, "Override: number of nodes");
    run_cmd->add_option("--n", opt_stats, "Override: statistics per node");
    run_cmd->add_option("--mu", opt_mu, "Override: location parameter");
    run_cmd->add_option("--alpha", opt_alpha, "Override: target FDR level");
    run_cmd->add_option("--q", opt_q, "Override: magnitude quantization levels");
    run_cmd->add_option("--L", opt_L, "Override: sampling grid size");
    run_cmd->add_option("--k", opt_k, "Override: p-value quantization levels");
    run_cmd->add_option("--grid", grid, "Override: grid values (comma separated)")
        ->delimiter(',');

    // --- once ---
    auto* once_cmd =
        app.add_subcommand("once", "Run one protocol round on statistics from a file");
    std::string protocol_name = "pooled_qbc";
    std::string input_path;
    protocols::ProtocolParams once_params;
    once_cmd->add_option("--protocol", protocol_name, "Protocol name")->required();
    once_cmd->add_option("--input", input_path,
                         "Statistics file: one node per line, comma separated")
        ->required();
    once_cmd->add_option("--alpha", once_params.alpha, "Target FDR / test level");
    once_cmd->add_option("--q", once_params.q, "Magnitude quantization levels");
    once_cmd->add_option("--L", once_params.L, "Sampling grid size");
    once_cmd->add_option("--k", once_params.k, "P-value quantization levels");
    once_cmd->add_flag("--censor", once_params.censor,
                       "Censor above-alpha quantized p-values to one bit");

    // --- budget ---
    auto* budget_cmd =
        app.add_subcommand("budget", "Print bit costs and the sample-budget table");
    std::uint64_t budget_n = 50;
    std::uint64_t budget_q = 4;
    bool budget_table = false;
    budget_cmd->add_option("--n", budget_n, "Statistics per node");
    budget_cmd->add_option("--q", budget_q, "Magnitude quantization levels");
    budget_cmd->add_flag("--table", budget_table, "Print the full n=10..100 table");

    // --- selftest ---
    auto* selftest_cmd =
        app.add_subcommand("selftest", "Run the built-in invariant suite");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            // Apply config-file values wherever the flag was not given on the
            // command line; explicit flags always win.
            if (!config_path.empty()) {
                static const std::set<std::string> known{
                    "experiment", "simulation", "methods", "trials", "seed", "jobs",
                    "output",     "N",          "n",       "mu",     "alpha", "q",
                    "L",          "k",          "grid"};
                for (const auto& [key, value] : read_config_file(config_path)) {
                    if (!known.count(key)) {
                        throw std::runtime_error("unknown config key: " + key);
                    }
                    if (run_cmd->get_option("--" + key)->count() > 0) continue;
                    if (key == "experiment") experiment = value;
                    else if (key == "simulation") simulation = value;
                    else if (key == "methods") method_names = split_commas(value);
                    else if (key == "trials") trials = std::stoull(value);
                    else if (key == "seed") seed = std::stoull(value);
                    else if (key == "jobs") jobs = static_cast<unsigned>(std::stoul(value));
                    else if (key == "output") output = value;
                    else if (key == "N") opt_nodes = std::stoull(value);
                    else if (key == "n") opt_stats = std::stoull(value);
                    else if (key == "mu") opt_mu = std::stod(value);
                    else if (key == "alpha") opt_alpha = std::stod(value);
                    else if (key == "q") opt_q = static_cast<unsigned>(std::stoul(value));
                    else if (key == "L") opt_L = static_cast<unsigned>(std::stoul(value));
                    else if (key == "k") opt_k = static_cast<unsigned>(std::stoul(value));
                    else if (key == "grid") {
                        grid.clear();
                        for (const std::string& v : split_commas(value)) {
                            grid.push_back(std::stod(v));
                        }
                    }
                }
            }
            experiments::RunConfig config;
            config.experiment = parse_experiment(experiment);
            config.simulation = parse_simulation(simulation);
            config.methods = parse_methods(method_names);
            config.trials = trials;
            config.seed = seed;
            config.jobs = jobs;
            config.num_nodes = opt_nodes;
            config.stats_per_node = opt_stats;
            config.mu_bold = opt_mu;
            config.alpha = opt_alpha;
            config.q = opt_q;
            config.L = opt_L;
            config.k = opt_k;
            if (!grid.empty()) config.grid = grid;

            if (output.empty()) {
                output = experiment + "_" + simulation + ".csv";
                if (const char* dir = std::getenv("STARFDR_OUTPUT_DIR")) {
                    output = std::string(dir) + "/" + output;
                }
            }
            const auto points = experiments::run_experiment(config);
            std::ostringstream csv;
            experiments::write_csv(csv, points);
            const double alpha = config.alpha.value_or(0.2);
            const std::string plot = experiments::gnuplot_script(output, points, alpha);

            std::ofstream csv_out(output, std::ios::binary | std::ios::trunc);
            if (!csv_out) throw std::runtime_error("cannot write " + output);
            csv_out << csv.str();
            csv_out.close();
            std::ofstream plot_out(output + ".gp", std::ios::binary | std::ios::trunc);
            if (!plot_out) throw std::runtime_error("cannot write " + output + ".gp");
            plot_out << plot;
            std::cout << "wrote " << points.size() << " curve points to " << output
                      << " (plot script: " << output << ".gp)\n";
        } else if (*once_cmd) {
            const auto method = protocols::method_from_name(protocol_name);
            if (!method) throw std::runtime_error("unknown protocol: " + protocol_name);
            const auto nodes = read_stats_file(input_path);
            netsim::StarTopology topology;
            topology.num_nodes = nodes.size();
            for (const auto& sv : nodes) topology.per_node_m.push_back(sv.size());
            const auto [decision, transcript] =
                netsim::run_round(topology, *method, nodes, once_params);
            std::cout << "protocol: " << protocols::method_name(*method) << '\n';
            print_decision(decision, transcript);
        } else if (*budget_cmd) {
            auto report = [](std::uint64_t n, std::uint64_t q) {
                const unsigned L = compression::sample_budget_L(n, q);
                const auto qbits = netsim::charge(
                    netsim::PayloadKind::signed_quantized_vector, n,
                    static_cast<unsigned>(q), 0, 0);
                const auto sbits =
                    netsim::charge(netsim::PayloadKind::sampled_counts, n, 0, L, 0);
                std::cout << "n=" << n << " q=" << q << ": L=" << L << ", q-BC uplink "
                          << qbits << " bits/node, sampled-BC uplink " << sbits
                          << " bits/node\n";
            };
            if (budget_table) {
                for (std::uint64_t n = 10; n <= 100; n += 10) report(n, budget_q);
            } else {
                report(budget_n, budget_q);
            }
        } else if (*selftest_cmd) {
            return run_selftest();
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
