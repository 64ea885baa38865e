#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "starfdr/common.hpp"
#include "starfdr/protocols.hpp"
#include "starfdr/rng.hpp"

// Synthetic data generation, Monte Carlo execution, and FDR/power curve
// estimation over the parameter grids of the three experiments.

namespace starfdr::experiments {

// Gaussian location model over a star network. Node indices are 1-based in
// the rate rules. Per node i, floor(pi1(i) * n) statistics are false nulls;
// every statistic draws its own variance (and mean, when a false null) from
// the jitter laws.
struct DataModel {
    std::size_t num_nodes = 10;
    std::size_t stats_per_node = 50;
    double mu_bold = 2.5;
    bool null_only = false;  // force every hypothesis to be a true null
    std::uint64_t seed = 0;

    double pi1(std::size_t node) const {
        return 0.3 - 0.2 * static_cast<double>(node - 1) / static_cast<double>(num_nodes);
    }
    double mu_base(std::size_t node) const {
        return mu_bold + static_cast<double>(node) / static_cast<double>(num_nodes);
    }
    double sigma2_base(std::size_t node) const {
        return 1.0 + static_cast<double>(node) / static_cast<double>(num_nodes);
    }
    std::size_t num_false_nulls(std::size_t node) const {
        if (null_only) return 0;
        return static_cast<std::size_t>(
            std::floor(pi1(node) * static_cast<double>(stats_per_node)));
    }

    void validate() const {
        if (num_nodes == 0 || num_nodes > 0xFFFF) {
            throw std::invalid_argument("DataModel: num_nodes out of range");
        }
        if (stats_per_node == 0) {
            throw std::invalid_argument("DataModel: stats_per_node must be >= 1");
        }
    }
};

// One trial of statistics for every node. Node i uses the stream
// (seed, trial_id, i): first a Fisher-Yates shuffle of the false-null
// positions, then per statistic the draws (sigma^2, mu if false null, z) in
// index order. This fixed order is what makes runs reproducible from the
// seed alone.
inline std::vector<StatVector> generate_trial(const DataModel& model,
                                              std::uint64_t trial_id) {
    model.validate();
    std::vector<StatVector> nodes;
    nodes.reserve(model.num_nodes);
    const std::size_t n = model.stats_per_node;
    for (std::size_t idx = 0; idx < model.num_nodes; ++idx) {
        const std::size_t node = idx + 1;
        rng::Stream stream(model.seed, trial_id, static_cast<std::uint32_t>(idx));
        const std::size_t n1 = model.num_false_nulls(node);

        std::vector<std::uint8_t> is_alt(n, 0);
        std::fill(is_alt.begin(), is_alt.begin() + static_cast<std::ptrdiff_t>(n1), 1);
        for (std::size_t j = n - 1; j >= 1; --j) {
            std::swap(is_alt[j], is_alt[stream.below(j + 1)]);
        }

        const double mu_lo = model.mu_base(node) - 0.5;
        const double mu_hi = model.mu_base(node) + 0.5;
        const double s2_lo = model.sigma2_base(node) - 0.25;
        const double s2_hi = model.sigma2_base(node) + 0.25;
        StatVector sv;
        sv.values.resize(n);
        sv.null_mask.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double sigma2 = stream.uniform(s2_lo, s2_hi);
            const double mu = is_alt[j] ? stream.uniform(mu_lo, mu_hi) : 0.0;
            sv.values[j] = mu + std::sqrt(sigma2) * stream.normal();
            sv.null_mask[j] = is_alt[j] ? 0 : 1;
        }
        nodes.push_back(std::move(sv));
    }
    return nodes;
}

struct TrialMetrics {
    double fdp = 0.0;
    double tpp = 0.0;
    std::size_t reject_count = 0;
    std::uint64_t bits = 0;
};

namespace detail {

class NeumaierSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        comp_ += (std::abs(sum_) >= std::abs(x)) ? (sum_ - t) + x : (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline std::pair<double, double> mean_and_se(const std::vector<double>& xs) {
    NeumaierSum total;
    for (double x : xs) total.add(x);
    const double mean = total.value() / static_cast<double>(xs.size());
    if (xs.size() < 2) return {mean, 0.0};
    NeumaierSum sq;
    for (double x : xs) sq.add((x - mean) * (x - mean));
    const double var = sq.value() / static_cast<double>(xs.size() - 1);
    return {mean, std::sqrt(var / static_cast<double>(xs.size()))};
}

}  // namespace detail

struct Estimate {
    double fdr_hat = 0.0;
    double fdr_se = 0.0;
    double power_hat = 0.0;
    double power_se = 0.0;
    std::size_t trials = 0;
};

inline Estimate estimate_metrics(const std::vector<TrialMetrics>& trials) {
    if (trials.empty()) throw std::invalid_argument("estimate_metrics: no trials");
    std::vector<double> fdp(trials.size()), tpp(trials.size());
    for (std::size_t t = 0; t < trials.size(); ++t) {
        fdp[t] = trials[t].fdp;
        tpp[t] = trials[t].tpp;
    }
    const auto [fdr, fdr_se] = detail::mean_and_se(fdp);
    const auto [power, power_se] = detail::mean_and_se(tpp);
    return {fdr, fdr_se, power, power_se, trials.size()};
}

// FDP/TPP for per-node rejection sets against the simulation ground truth.
inline TrialMetrics individual_metrics(const protocols::Decision& decision,
                                       const std::vector<StatVector>& nodes) {
    if (!decision.per_node_rejections) {
        throw std::invalid_argument("individual_metrics: decision has no rejection sets");
    }
    std::size_t rejected = 0, false_rejected = 0, false_nulls = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto& mask = nodes[i].null_mask;
        for (std::uint8_t is_null : mask) false_nulls += is_null ? 0 : 1;
        for (std::size_t j : (*decision.per_node_rejections)[i]) {
            ++rejected;
            if (mask[j]) ++false_rejected;
        }
    }
    TrialMetrics metrics;
    metrics.reject_count = rejected;
    metrics.bits = decision.total_bits;
    metrics.fdp = static_cast<double>(false_rejected) /
                  std::max<double>(static_cast<double>(rejected), 1.0);
    metrics.tpp = static_cast<double>(rejected - false_rejected) /
                  std::max<double>(static_cast<double>(false_nulls), 1.0);
    return metrics;
}

// FDP/TPP over intersection hypotheses: variable j is a true null only when
// it is null at every node.
inline TrialMetrics intersection_metrics(const protocols::Decision& decision,
                                         const std::vector<StatVector>& nodes) {
    if (!decision.per_node_rejections || decision.per_node_rejections->empty()) {
        throw std::invalid_argument("intersection_metrics: decision has no rejection sets");
    }
    const std::size_t m = nodes.front().size();
    std::vector<std::uint8_t> all_null(m, 1);
    for (const StatVector& sv : nodes) {
        for (std::size_t j = 0; j < m; ++j) {
            if (!sv.null_mask[j]) all_null[j] = 0;
        }
    }
    std::size_t signal_vars = 0;
    for (std::size_t j = 0; j < m; ++j) signal_vars += all_null[j] ? 0 : 1;

    const protocols::IndexSet& rejected = decision.per_node_rejections->front();
    std::size_t false_rejected = 0;
    for (std::size_t j : rejected) {
        if (all_null[j]) ++false_rejected;
    }
    TrialMetrics metrics;
    metrics.reject_count = rejected.size();
    metrics.bits = decision.total_bits;
    metrics.fdp = static_cast<double>(false_rejected) /
                  std::max<double>(static_cast<double>(rejected.size()), 1.0);
    metrics.tpp = static_cast<double>(rejected.size() - false_rejected) /
                  std::max<double>(static_cast<double>(signal_vars), 1.0);
    return metrics;
}

// ---------------------------------------------------------------------------
// Experiment runner
// ---------------------------------------------------------------------------

enum class ExperimentId { exp1, exp2, exp3 };
enum class SimulationId { I, II, III };
enum class GridAxis { n, N, mu };

inline std::string_view experiment_name(ExperimentId id) {
    switch (id) {
        case ExperimentId::exp1: return "exp1";
        case ExperimentId::exp2: return "exp2";
        case ExperimentId::exp3: return "exp3";
    }
    return "unknown";
}

inline std::string_view simulation_name(SimulationId id) {
    switch (id) {
        case SimulationId::I: return "I";
        case SimulationId::II: return "II";
        case SimulationId::III: return "III";
    }
    return "unknown";
}

inline std::string_view axis_name(GridAxis axis) {
    switch (axis) {
        case GridAxis::n: return "n";
        case GridAxis::N: return "N";
        case GridAxis::mu: return "mu";
    }
    return "unknown";
}

struct RunConfig {
    ExperimentId experiment = ExperimentId::exp1;
    SimulationId simulation = SimulationId::I;
    std::vector<protocols::Method> methods;  // empty = experiment defaults
    std::size_t trials = 10000;
    std::uint64_t seed = 0;
    unsigned jobs = 1;
    // Optional overrides of the fixed (non-axis) parameters and the grid.
    std::optional<std::size_t> num_nodes;
    std::optional<std::size_t> stats_per_node;
    std::optional<double> mu_bold;
    std::optional<double> alpha;
    std::optional<unsigned> q;
    std::optional<unsigned> L;
    std::optional<unsigned> k;
    std::optional<std::vector<double>> grid;
};

struct CurvePoint {
    std::string experiment;
    std::string simulation;
    std::string method;
    std::string grid_axis;
    double grid_value = 0.0;
    std::size_t trials = 0;
    double fdr_hat = 0.0;
    double fdr_se = 0.0;
    double power_hat = 0.0;
    double power_se = 0.0;
    double uplink_bits_per_node = 0.0;
};

namespace detail {

struct ResolvedRun {
    GridAxis axis = GridAxis::n;
    std::vector<double> grid;
    std::size_t base_nodes = 10;
    std::size_t base_stats = 50;
    double base_mu = 2.5;
    double alpha = 0.2;
    unsigned q = 4;
    unsigned k = 16;
    std::optional<unsigned> fixed_L;  // empty: L from the budget formula
    std::vector<protocols::Method> methods;
};

inline std::vector<double> arithmetic_grid(double lo, double hi, double step) {
    std::vector<double> grid;
    for (double v = lo; v <= hi + 1e-9; v += step) grid.push_back(v);
    return grid;
}

inline ResolvedRun resolve(const RunConfig& config) {
    using protocols::Method;
    ResolvedRun run;
    switch (config.experiment) {
        case ExperimentId::exp1:
            run.methods = {Method::pooled_qbc, Method::sampled_bc, Method::pooled_bc_baseline};
            run.base_nodes = 10;
            run.base_stats = 50;
            run.base_mu = 2.5;
            run.q = 4;
            switch (config.simulation) {
                case SimulationId::I:
                    run.axis = GridAxis::n;
                    run.grid = arithmetic_grid(10, 100, 10);
                    break;
                case SimulationId::II:
                    run.axis = GridAxis::N;
                    run.grid = arithmetic_grid(2, 20, 2);
                    break;
                case SimulationId::III:
                    run.axis = GridAxis::mu;
                    run.grid = arithmetic_grid(0.5, 4.0, 0.5);
                    break;
            }
            break;
        case ExperimentId::exp2:
            run.methods = {Method::global_pooled_qbc, Method::global_wilcoxon,
                           Method::global_sign_test, Method::global_sampled_bc,
                           Method::wilcoxon_simes, Method::sign_simes};
            run.base_nodes = 10;
            run.base_stats = 10;
            run.base_mu = 1.5;
            run.q = 16;
            run.fixed_L = 5;
            run.k = 16;
            switch (config.simulation) {
                case SimulationId::I:
                    run.axis = GridAxis::n;
                    run.grid = {5, 10, 20, 30, 40, 50};
                    break;
                case SimulationId::II:
                    run.axis = GridAxis::mu;
                    run.grid = arithmetic_grid(0.5, 4.0, 0.5);
                    break;
                case SimulationId::III:
                    run.axis = GridAxis::N;
                    run.grid = arithmetic_grid(2, 20, 2);
                    break;
            }
            break;
        case ExperimentId::exp3:
            run.methods = {Method::averaged_bc, Method::sign_bh_simplified};
            run.base_nodes = 10;
            run.base_stats = 30;
            run.base_mu = 1.0;
            run.q = 16;
            switch (config.simulation) {
                case SimulationId::I:
                    run.axis = GridAxis::n;
                    run.grid = arithmetic_grid(10, 60, 10);
                    break;
                case SimulationId::II:
                    run.axis = GridAxis::N;
                    run.grid = arithmetic_grid(2, 20, 2);
                    break;
                case SimulationId::III:
                    run.axis = GridAxis::mu;
                    run.grid = arithmetic_grid(0.5, 4.0, 0.5);
                    break;
            }
            break;
    }
    if (!config.methods.empty()) run.methods = config.methods;
    if (config.num_nodes) run.base_nodes = *config.num_nodes;
    if (config.stats_per_node) run.base_stats = *config.stats_per_node;
    if (config.mu_bold) run.base_mu = *config.mu_bold;
    if (config.alpha) run.alpha = *config.alpha;
    if (config.q) run.q = *config.q;
    if (config.L) run.fixed_L = *config.L;
    if (config.k) run.k = *config.k;
    if (config.grid) run.grid = *config.grid;
    if (run.grid.empty()) throw std::invalid_argument("run_experiment: empty grid");
    for (double v : run.grid) {
        if (!(v > 0.0) && run.axis != GridAxis::mu) {
            throw std::invalid_argument("run_experiment: grid values must be positive");
        }
    }
    if (!(run.alpha > 0.0 && run.alpha < 1.0)) {
        throw std::invalid_argument("run_experiment: alpha must lie in (0,1)");
    }
    return run;
}

// Per-trial rejection/metric rows for one (grid point, batch), stored per
// method then reduced in a fixed order so the result is independent of the
// number of worker threads.
inline void run_batch(const DataModel& model, const std::vector<protocols::Method>& methods,
                      const protocols::ProtocolParams& params, std::size_t trials,
                      std::uint64_t trial_id_base, unsigned jobs,
                      std::vector<std::vector<TrialMetrics>>& out) {
    out.assign(methods.size(), std::vector<TrialMetrics>(trials));
    auto worker = [&](std::size_t t_begin, std::size_t t_end) {
        for (std::size_t t = t_begin; t < t_end; ++t) {
            const std::vector<StatVector> nodes =
                generate_trial(model, trial_id_base + t);
            for (std::size_t m = 0; m < methods.size(); ++m) {
                const protocols::Decision decision =
                    protocols::run_protocol(methods[m], nodes, params);
                TrialMetrics metrics;
                switch (protocols::method_setting(methods[m])) {
                    case protocols::Setting::individual:
                        metrics = individual_metrics(decision, nodes);
                        break;
                    case protocols::Setting::intersection:
                        metrics = intersection_metrics(decision, nodes);
                        break;
                    case protocols::Setting::global: {
                        const double hit = *decision.global_reject ? 1.0 : 0.0;
                        metrics.fdp = hit;  // type-I indicator under a null model
                        metrics.tpp = hit;  // power indicator under the alternative
                        metrics.reject_count = *decision.global_reject ? 1 : 0;
                        metrics.bits = decision.total_bits;
                        break;
                    }
                }
                out[m][t] = metrics;
            }
        }
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(jobs, trials));
    if (workers == 1) {
        worker(0, trials);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    const std::size_t chunk = (trials + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t b = w * chunk;
        const std::size_t e = std::min(trials, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&, b, e] {
            try {
                worker(b, e);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (std::thread& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace detail

// Run the configured experiment: for every grid value and method, `trials`
// Monte Carlo rounds, aggregated into one CurvePoint per (grid value, method).
// Global (setting II) methods run an extra all-null batch per grid point to
// estimate the type-I error rate; everyone else derives FDR and power from
// the same trials. Deterministic given (config, seed).
inline std::vector<CurvePoint> run_experiment(const RunConfig& config) {
    if (config.trials == 0) throw std::invalid_argument("run_experiment: trials must be >= 1");
    const detail::ResolvedRun run = detail::resolve(config);

    std::vector<CurvePoint> points;
    for (std::size_t g = 0; g < run.grid.size(); ++g) {
        const double grid_value = run.grid[g];
        DataModel model;
        model.seed = config.seed;
        model.num_nodes = run.base_nodes;
        model.stats_per_node = run.base_stats;
        model.mu_bold = run.base_mu;
        switch (run.axis) {
            case GridAxis::n:
                model.stats_per_node = static_cast<std::size_t>(grid_value);
                break;
            case GridAxis::N:
                model.num_nodes = static_cast<std::size_t>(grid_value);
                break;
            case GridAxis::mu:
                model.mu_bold = grid_value;
                break;
        }
        protocols::ProtocolParams params;
        params.alpha = run.alpha;
        params.q = run.q;
        params.k = run.k;
        params.L = run.fixed_L ? *run.fixed_L
                               : compression::sample_budget_L(model.stats_per_node, run.q);
        const bool needs_L =
            std::any_of(run.methods.begin(), run.methods.end(), [](protocols::Method m) {
                return m == protocols::Method::sampled_bc ||
                       m == protocols::Method::global_sampled_bc;
            });
        if (needs_L && params.L < 2) {
            throw std::invalid_argument(
                "run_experiment: the sampling budget gives L < 2 at this grid point");
        }

        const std::uint64_t base_alt = (2 * g) * config.trials;
        const std::uint64_t base_null = (2 * g + 1) * config.trials;

        std::vector<std::vector<TrialMetrics>> alt_metrics;
        detail::run_batch(model, run.methods, params, config.trials, base_alt,
                          config.jobs, alt_metrics);

        std::vector<protocols::Method> global_methods;
        std::vector<std::size_t> global_positions;
        for (std::size_t m = 0; m < run.methods.size(); ++m) {
            if (protocols::method_setting(run.methods[m]) == protocols::Setting::global) {
                global_methods.push_back(run.methods[m]);
                global_positions.push_back(m);
            }
        }
        std::vector<std::vector<TrialMetrics>> null_metrics;
        if (!global_methods.empty()) {
            DataModel null_model = model;
            null_model.null_only = true;
            detail::run_batch(null_model, global_methods, params, config.trials, base_null,
                              config.jobs, null_metrics);
        }

        // Uplink cost is a deterministic function of (m, q, L, k); read it off
        // the first trial's transcript.
        const std::vector<StatVector> probe = generate_trial(model, base_alt);
        for (std::size_t m = 0; m < run.methods.size(); ++m) {
            netsim::Transcript transcript;
            protocols::run_protocol(run.methods[m], probe, params, &transcript);
            const double uplink_per_node =
                static_cast<double>(transcript.total_uplink_bits()) /
                static_cast<double>(transcript.uplink_bits_per_node.size());

            Estimate est = estimate_metrics(alt_metrics[m]);
            CurvePoint point;
            point.experiment = std::string(experiment_name(config.experiment));
            point.simulation = std::string(simulation_name(config.simulation));
            point.method = std::string(protocols::method_name(run.methods[m]));
            point.grid_axis = std::string(axis_name(run.axis));
            point.grid_value = grid_value;
            point.trials = config.trials;
            point.power_hat = est.power_hat;
            point.power_se = est.power_se;
            point.fdr_hat = est.fdr_hat;
            point.fdr_se = est.fdr_se;
            point.uplink_bits_per_node = uplink_per_node;
            if (protocols::method_setting(run.methods[m]) == protocols::Setting::global) {
                const auto pos = std::find(global_positions.begin(), global_positions.end(), m);
                const Estimate null_est =
                    estimate_metrics(null_metrics[pos - global_positions.begin()]);
                point.fdr_hat = null_est.fdr_hat;
                point.fdr_se = null_est.fdr_se;
            }
            points.push_back(std::move(point));
        }
    }
    return points;
}

// CSV schema:
//   experiment,simulation,method,grid_axis,grid_value,trials,
//   fdr_hat,fdr_se,power_hat,power_se,uplink_bits_per_node
inline void write_csv(std::ostream& os, const std::vector<CurvePoint>& points) {
    os << "experiment,simulation,method,grid_axis,grid_value,trials,"
          "fdr_hat,fdr_se,power_hat,power_se,uplink_bits_per_node\n";
    char buf[256];
    for (const CurvePoint& p : points) {
        std::snprintf(buf, sizeof(buf), "%g,%zu,%.6f,%.6f,%.6f,%.6f,%g", p.grid_value,
                      p.trials, p.fdr_hat, p.fdr_se, p.power_hat, p.power_se,
                      p.uplink_bits_per_node);
        os << p.experiment << ',' << p.simulation << ',' << p.method << ','
           << p.grid_axis << ',' << buf << '\n';
    }
}

// Standalone gnuplot script reproducing the two-panel figure layout: FDR with
// a horizontal line at alpha, and power, one curve per method.
inline std::string gnuplot_script(std::string_view csv_path,
                                  const std::vector<CurvePoint>& points, double alpha) {
    std::vector<std::string> methods;
    std::string axis = points.empty() ? "n" : points.front().grid_axis;
    for (const CurvePoint& p : points) {
        if (std::find(methods.begin(), methods.end(), p.method) == methods.end()) {
            methods.push_back(p.method);
        }
    }
    std::ostringstream os;
    os << "# Generated next to " << csv_path << "; run with: gnuplot <script>\n";
    os << "set datafile separator ','\n";
    os << "set terminal pngcairo noenhanced size 1100,420\n";
    os << "set output '" << csv_path << ".png'\n";
    os << "set multiplot layout 1,2\n";
    os << "set key outside right\n";
    os << "set xlabel '" << axis << "'\n";
    os << "set title 'FDR / type-I error'\n";
    os << "set yrange [0:*]\n";
    auto curve = [&](const std::string& method, int ycol, int ecol) {
        std::ostringstream c;
        c << "'" << csv_path << "' skip 1 using (strcol(3) eq '" << method
          << "' ? column(5) : NaN):" << ycol << ":" << ecol
          << " with yerrorlines title '" << method << "'";
        return c.str();
    };
    os << "plot \\\n";
    for (const std::string& m : methods) os << "  " << curve(m, 7, 8) << ", \\\n";
    os << "  " << alpha << " with lines dashtype 2 linecolor 'black' title 'alpha'\n";
    os << "set title 'Power'\n";
    os << "plot \\\n";
    for (std::size_t i = 0; i < methods.size(); ++i) {
        os << "  " << curve(methods[i], 9, 10);
        os << (i + 1 < methods.size() ? ", \\\n" : "\n");
    }
    os << "unset multiplot\n";
    return os.str();
}

}  // namespace starfdr::experiments
