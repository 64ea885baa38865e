#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "starfdr/experiments.hpp"

using namespace starfdr;

TEST_CASE("generate_trial: false-null counts follow the per-node rate rule") {
    experiments::DataModel model;
    model.num_nodes = 10;
    model.stats_per_node = 50;
    model.seed = 1;
    const auto nodes = experiments::generate_trial(model, 0);
    REQUIRE(nodes.size() == 10);
    auto false_nulls = [](const StatVector& sv) {
        std::size_t count = 0;
        for (auto is_null : sv.null_mask) count += is_null ? 0 : 1;
        return count;
    };
    CHECK(false_nulls(nodes[0]) == 15);  // floor(0.30 * 50), node 1
    CHECK(false_nulls(nodes[9]) == 6);   // floor(0.12 * 50), node 10
    for (const auto& sv : nodes) {
        CHECK(sv.values.size() == 50);
        CHECK(sv.null_mask.size() == 50);
    }
}

TEST_CASE("generate_trial: null-only configuration is symmetric noise") {
    experiments::DataModel model;
    model.num_nodes = 4;
    model.stats_per_node = 200;
    model.null_only = true;
    model.seed = 2;
    double sum = 0.0;
    std::size_t count = 0;
    for (int trial = 0; trial < 50; ++trial) {
        for (const auto& sv : experiments::generate_trial(model, trial)) {
            for (auto is_null : sv.null_mask) REQUIRE(is_null == 1);
            for (double v : sv.values) sum += v;
            count += sv.values.size();
        }
    }
    // Mean of ~40k centered draws with sd <= 1.5.
    CHECK(std::abs(sum / count) < 3.0 * 1.5 / std::sqrt(static_cast<double>(count)));
}

TEST_CASE("generate_trial: deterministic in (seed, trial), distinct across trials") {
    experiments::DataModel model;
    model.num_nodes = 3;
    model.stats_per_node = 8;
    model.seed = 7;
    const auto a = experiments::generate_trial(model, 5);
    const auto b = experiments::generate_trial(model, 5);
    const auto c = experiments::generate_trial(model, 6);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a[i].values == b[i].values);
        REQUIRE(a[i].null_mask == b[i].null_mask);
    }
    CHECK(a[0].values != c[0].values);
}

TEST_CASE("estimate_metrics: worked examples") {
    std::vector<experiments::TrialMetrics> trials(2);
    trials[0].fdp = 0.0;
    trials[1].fdp = 0.5;
    const auto est = experiments::estimate_metrics(trials);
    CHECK(est.fdr_hat == 0.25);
    CHECK(est.trials == 2);

    std::vector<experiments::TrialMetrics> zeros(5);  // all-null, no rejections
    CHECK(experiments::estimate_metrics(zeros).fdr_hat == 0.0);

    CHECK_THROWS_AS(experiments::estimate_metrics({}), std::invalid_argument);
}

TEST_CASE("estimate_metrics: recovers a known Bernoulli mixture mean") {
    rng::Stream s(42, 0, 0);
    const double truth = 0.3 * 0.5;  // Bernoulli(0.3) scaled by 0.5
    std::vector<experiments::TrialMetrics> trials(4000);
    for (auto& t : trials) t.fdp = (s.next_unit() < 0.3) ? 0.5 : 0.0;
    const auto est = experiments::estimate_metrics(trials);
    CHECK(std::abs(est.fdr_hat - truth) <= 3.0 * est.fdr_se);
}

TEST_CASE("individual and intersection metrics from hand-built decisions") {
    std::vector<StatVector> nodes;
    nodes.emplace_back(std::vector<double>{1, 2, 3},
                       std::vector<std::uint8_t>{1, 0, 0});  // nulls: {0}
    nodes.emplace_back(std::vector<double>{4, 5, 6},
                       std::vector<std::uint8_t>{1, 1, 0});  // nulls: {0,1}

    protocols::Decision decision;
    decision.per_node_rejections = std::vector<protocols::IndexSet>{{0, 1}, {2}};
    const auto ind = experiments::individual_metrics(decision, nodes);
    CHECK(ind.reject_count == 3);
    CHECK(ind.fdp == Catch::Approx(1.0 / 3.0));  // index 0 at node 0 is null
    CHECK(ind.tpp == Catch::Approx(2.0 / 3.0));  // 2 of 3 false nulls caught

    // Intersection ground truth: variable j null iff null everywhere.
    protocols::Decision shared;
    shared.per_node_rejections =
        std::vector<protocols::IndexSet>(2, protocols::IndexSet{0, 2});
    const auto inter = experiments::intersection_metrics(shared, nodes);
    CHECK(inter.fdp == Catch::Approx(0.5));  // variable 0 is all-null
    CHECK(inter.tpp == Catch::Approx(0.5));  // caught variable 2 of signals {1,2}
}

TEST_CASE("run_experiment: row layout, determinism, and thread independence") {
    experiments::RunConfig config;
    config.experiment = experiments::ExperimentId::exp1;
    config.simulation = experiments::SimulationId::I;
    config.trials = 40;
    config.seed = 11;
    config.grid = std::vector<double>{10, 20};

    const auto points = experiments::run_experiment(config);
    REQUIRE(points.size() == 6);  // 2 grid values x 3 methods
    CHECK(points[0].experiment == "exp1");
    CHECK(points[0].simulation == "I");
    CHECK(points[0].grid_axis == "n");
    CHECK(points[0].trials == 40);

    std::ostringstream a;
    experiments::write_csv(a, points);
    config.jobs = 4;
    std::ostringstream b;
    experiments::write_csv(b, experiments::run_experiment(config));
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind("experiment,simulation,method,grid_axis,grid_value,trials,"
                        "fdr_hat,fdr_se,power_hat,power_se,uplink_bits_per_node\n",
                        0) == 0);
}

TEST_CASE("run_experiment: global methods report the null-model type-I rate") {
    experiments::RunConfig config;
    config.experiment = experiments::ExperimentId::exp2;
    config.simulation = experiments::SimulationId::I;
    config.trials = 300;
    config.seed = 12;
    config.grid = std::vector<double>{10};
    config.methods = {protocols::Method::global_sign_test};
    const auto points = experiments::run_experiment(config);
    REQUIRE(points.size() == 1);
    // Exact test under the null: level within the Monte Carlo band; decent
    // power under the alternative model.
    CHECK(points[0].fdr_hat <= 0.2 + 3.0 * std::sqrt(0.25 / 300));
    CHECK(points[0].power_hat > points[0].fdr_hat);
    CHECK(points[0].uplink_bits_per_node == 8);  // 2 * ceil(log2(11))
}

TEST_CASE("run_experiment: split halves agree within the error bars") {
    experiments::RunConfig config;
    config.experiment = experiments::ExperimentId::exp1;
    config.simulation = experiments::SimulationId::I;
    config.trials = 600;
    config.seed = 13;
    config.grid = std::vector<double>{30};
    config.methods = {protocols::Method::pooled_qbc};
    const auto full = experiments::run_experiment(config);

    // Recompute the two halves directly from per-trial metrics.
    experiments::DataModel model;
    model.num_nodes = 10;
    model.stats_per_node = 30;
    model.mu_bold = 2.5;
    model.seed = 13;
    std::vector<experiments::TrialMetrics> first, second;
    for (int t = 0; t < 600; ++t) {
        const auto nodes = experiments::generate_trial(model, t);
        const auto decision = protocols::pooled_qbc(nodes, 0.2, 4);
        (t < 300 ? first : second).push_back(
            experiments::individual_metrics(decision, nodes));
    }
    const auto e1 = experiments::estimate_metrics(first);
    const auto e2 = experiments::estimate_metrics(second);
    const double gap = std::abs(e1.power_hat - e2.power_hat);
    CHECK(gap <= 3.0 * std::sqrt(e1.power_se * e1.power_se + e2.power_se * e2.power_se));
    // Full-run estimate sits between the halves.
    CHECK(full[0].power_hat >= std::min(e1.power_hat, e2.power_hat) - 1e-12);
    CHECK(full[0].power_hat <= std::max(e1.power_hat, e2.power_hat) + 1e-12);
}

TEST_CASE("power grows with the location parameter", "[montecarlo]") {
    experiments::RunConfig config;
    config.experiment = experiments::ExperimentId::exp1;
    config.simulation = experiments::SimulationId::III;
    config.trials = 600;
    config.seed = 14;
    config.grid = std::vector<double>{1.0, 2.0, 3.0};
    const auto points = experiments::run_experiment(config);
    for (const std::string method : {"pooled_qbc", "sampled_bc", "pooled_bc"}) {
        std::vector<const experiments::CurvePoint*> curve;
        for (const auto& p : points) {
            if (p.method == method) curve.push_back(&p);
        }
        REQUIRE(curve.size() == 3);
        for (std::size_t i = 1; i < curve.size(); ++i) {
            const double slack = 3.0 * std::sqrt(curve[i]->power_se * curve[i]->power_se +
                                                 curve[i - 1]->power_se * curve[i - 1]->power_se);
            INFO(method << ": power(" << curve[i - 1]->grid_value
                        << ")=" << curve[i - 1]->power_hat << " vs power("
                        << curve[i]->grid_value << ")=" << curve[i]->power_hat);
            CHECK(curve[i]->power_hat >= curve[i - 1]->power_hat - slack);
        }
    }
}

TEST_CASE("run_experiment: configuration errors") {
    experiments::RunConfig config;
    config.trials = 0;
    CHECK_THROWS_AS(experiments::run_experiment(config), std::invalid_argument);
    config.trials = 10;
    config.grid = std::vector<double>{};
    CHECK_THROWS_AS(experiments::run_experiment(config), std::invalid_argument);
    config.grid = std::vector<double>{10};
    config.alpha = 1.5;
    CHECK_THROWS_AS(experiments::run_experiment(config), std::invalid_argument);
}

TEST_CASE("gnuplot script references the CSV and the alpha line") {
    experiments::RunConfig config;
    config.trials = 10;
    config.grid = std::vector<double>{10};
    config.seed = 3;
    const auto points = experiments::run_experiment(config);
    const std::string script = experiments::gnuplot_script("out.csv", points, 0.2);
    CHECK(script.find("out.csv") != std::string::npos);
    CHECK(script.find("0.2 with lines") != std::string::npos);
    CHECK(script.find("pooled_qbc") != std::string::npos);
    CHECK(script.find("multiplot") != std::string::npos);
}
