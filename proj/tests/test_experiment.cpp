#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "modno/errors.hpp"
#include "modno/experiment.hpp"
#include "modno/metrics.hpp"
#include "modno/rng.hpp"

using namespace modno;

namespace {

ExperimentConfig tiny_config(const std::string& out_root) {
    ExperimentConfig cfg;
    cfg.experiment_id = "custom";
    cfg.n_train = 6;
    cfg.n_test = 3;
    cfg.n_sensors = 16;
    cfg.basis_count = 4;
    cfg.width = 8;
    cfg.depth = 1;
    cfg.train.epochs = 20;
    cfg.train.trunk_lr = 1e-3;
    cfg.train.branch_lr = 1e-3;
    cfg.train.eval_every = 10;
    cfg.q_sweep = {1.0, 0.7};
    cfg.out_root = out_root;
    cfg.seed = 5;

    OperatorSetup adv;
    adv.name = "advection";
    adv.pde.equation = Equation::advection;
    adv.pde.terminal_time = 0.1;
    adv.ic.family = IcFamily::gaussian_mix_b;
    adv.grid = Grid1D{1.0, 64};
    adv.train_mesh.n_points = 32;
    adv.test_mesh.n_points = 32;
    adv.test_mesh.offset_cells = 0.5;
    cfg.operators.push_back(adv);

    OperatorSetup wave;
    wave.name = "wave";
    wave.pde.equation = Equation::wave;
    wave.pde.terminal_time = 1.0;
    wave.ic.family = IcFamily::fourier_a;
    wave.grid = Grid1D{2.0, 64};
    wave.train_mesh.n_points = 32;
    wave.test_mesh.n_points = 32;
    wave.test_mesh.offset_cells = 0.5;
    cfg.operators.push_back(wave);
    return cfg;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(bool(in));
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempTree {
    std::string root;
    explicit TempTree(const std::string& name) : root("/tmp/modno_test_" + name) {
        std::filesystem::remove_all(root);
    }
    ~TempTree() { std::filesystem::remove_all(root); }
};

}  // namespace

TEST_CASE("metrics: relative error reference points") {
    Matrix t(3, 1);
    t(0, 0) = 1.0;
    t(1, 0) = -2.0;
    t(2, 0) = 0.5;
    CHECK(relative_l2(t, t) == 0.0);
    Matrix zero(3, 1);
    CHECK(relative_l2(zero, t) == 1.0);
    Matrix doubled = t;
    for (double& v : doubled.data) v *= 2.0;
    CHECK(relative_l2(doubled, t) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(relative_l2(t, zero), DegenerateTargetError);
}

TEST_CASE("experiment: named experiments enforce their operator counts") {
    TempTree tree("expshape");
    ExperimentConfig cfg = tiny_config(tree.root);
    cfg.experiment_id = "exp1";
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.experiment_id = "exp5";
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.experiment_id = "custom";
    cfg.validate();
    cfg.q_sweep.push_back(1.5);
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("experiment: end-to-end tiny run emits a complete results bundle") {
    TempTree tree("exprun");
    ExperimentConfig cfg = tiny_config(tree.root);
    ExperimentArtifacts art = run_experiment(cfg);

    CHECK(art.table.operator_names == std::vector<std::string>{"advection", "wave"});
    CHECK(art.table.single_errors.size() == 2);
    CHECK(art.table.modno_errors.rows == 2);
    CHECK(art.table.modno_errors.cols == 2);
    CHECK(art.table.cost_ratios.size() == 2);
    // q=1 costs exactly match the independent-models baseline; at q<1 the
    // ratio follows (dedicated + q*shared) / (dedicated + shared) per query.
    CHECK(art.table.cost_ratios[0] == doctest::Approx(1.0).epsilon(1e-15));
    double dedicated = 3.0 * (1 * 8 + 8 * 4);
    double shared = 3.0 * (16 * 8 + 8 * 4);
    CHECK(art.table.cost_ratios[1] ==
          doctest::Approx((dedicated + 0.7 * shared) / (dedicated + shared)).epsilon(1e-12));
    art.table.validate();

    namespace fs = std::filesystem;
    CHECK(fs::exists(fs::path(art.out_dir) / "results.csv"));
    CHECK(fs::exists(fs::path(art.out_dir) / "results.md"));
    CHECK(fs::exists(fs::path(art.out_dir) / "data" / "advection_train.bin"));
    CHECK(fs::exists(fs::path(art.out_dir) / "data" / "wave_test.bin"));
    CHECK(fs::exists(fs::path(art.out_dir) / "history_single_wave.csv"));
    CHECK(fs::exists(fs::path(art.out_dir) / "history_modno_q1.csv"));
    CHECK(fs::exists(fs::path(art.out_dir) / "solution_advection.txt"));

    SUBCASE("rerun with identical config is byte-identical") {
        std::string first = slurp((fs::path(art.out_dir) / "results.csv").string());
        ExperimentArtifacts again = run_experiment(cfg);
        CHECK(again.out_dir == art.out_dir);
        CHECK(slurp((fs::path(again.out_dir) / "results.csv").string()) == first);
    }

    SUBCASE("csv re-parse recovers every value exactly") {
        ResultsTable r = read_results_csv((fs::path(art.out_dir) / "results.csv").string());
        CHECK(r.experiment_id == art.table.experiment_id);
        CHECK(r.seed == art.table.seed);
        CHECK(r.config_hash == art.table.config_hash);
        CHECK(r.operator_names == art.table.operator_names);
        CHECK(r.single_errors == art.table.single_errors);
        CHECK(r.q_values == art.table.q_values);
        CHECK(r.cost_ratios == art.table.cost_ratios);
        CHECK(r.modno_errors == art.table.modno_errors);
    }

    SUBCASE("markdown has one row per operator plus the cost row") {
        std::string md = slurp((fs::path(art.out_dir) / "results.md").string());
        std::stringstream ss(md);
        std::string line;
        int op_rows = 0, cost_rows = 0, other = 0;
        std::getline(ss, line);  // header
        std::getline(ss, line);  // separator
        while (std::getline(ss, line)) {
            if (line.rfind("| cost ratio", 0) == 0) ++cost_rows;
            else if (line.rfind("| ", 0) == 0) ++op_rows;
            else ++other;
        }
        CHECK(op_rows == 2);
        CHECK(cost_rows == 1);
        CHECK(other == 0);
        CHECK(md.find("%") != std::string::npos);
    }

    SUBCASE("a different config hashes to a different directory") {
        ExperimentConfig other = cfg;
        other.seed = 6;
        ExperimentArtifacts art2 = run_experiment(other);
        CHECK(art2.out_dir != art.out_dir);
    }
}

TEST_CASE("experiment: single-q sweep yields one MODNO column") {
    TempTree tree("exprun1q");
    ExperimentConfig cfg = tiny_config(tree.root);
    cfg.q_sweep = {1.0};
    cfg.operators.pop_back();
    cfg.train.epochs = 5;
    ExperimentArtifacts art = run_experiment(cfg);
    CHECK(art.table.modno_errors.cols == 1);
    CHECK(art.table.cost_ratios.size() == 1);
}

TEST_CASE("experiment: plot data columns reproduce targets and predictions bit-exactly") {
    TempTree tree("plotdata");
    std::filesystem::create_directories(tree.root);
    InitialConditionSpec ic;
    ic.family = IcFamily::gaussian_mix_b;
    PdeSpec pde;
    pde.equation = Equation::advection;
    pde.terminal_time = 0.1;
    QueryMeshSpec mesh;
    mesh.n_points = 16;
    mesh.offset_cells = 0.5;
    Grid1D grid{1.0, 64};
    DatasetShard shard = build_shard(pde, ic, 2, 16, mesh, grid, 9, "test");

    ModnoModel model;
    model.n_sensors = 16;
    model.basis_count = 4;
    model.query_dims = {1};
    model.shared_branch = mlp_init({16, 8, 4}, Activation::tanh_act, 1);
    model.trunks = {mlp_init({1, 8, 4}, Activation::tanh_act, 2)};

    std::string path = tree.root + "/plot.txt";
    emit_solution_plotdata(model, 0, shard, {1}, path);

    Matrix u_hat = gather_rows(shard.batch.u_hats, {1});
    Matrix expect = modno_predict(model, 0, u_hat, shard.batch.queries[1].points);

    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "# x target prediction");
    std::getline(in, line);
    CHECK(line == "# sample 1");
    int r = 0;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        double x = 0, target = 0, pred = 0;
        ss >> x >> target >> pred;
        CHECK(x == shard.batch.queries[1].points(r, 0));
        CHECK(target == shard.batch.queries[1].targets(r, 0));
        CHECK(pred == expect(r, 0));
        ++r;
    }
    CHECK(r == 16);

    CHECK_THROWS_AS(emit_solution_plotdata(model, 0, shard, {5}, path), IndexError);
}

TEST_CASE("experiment: config files load with defaults and fail loudly") {
    TempTree tree("cfgload");
    std::filesystem::create_directories(tree.root);
    std::string path = tree.root + "/cfg.json";
    {
        std::ofstream out(path);
        out << R"({
            "experiment": "custom",
            "seed": 11,
            "n_train": 4, "n_test": 2, "n_sensors": 8,
            "basis_count": 4, "width": 8, "depth": 1,
            "grid_points": 64,
            "q_sweep": [1.0, 0.8],
            "train": {"epochs": 7, "optimizer": "sgd", "trunk_lr": 0.01,
                      "branch_lr": 0.02, "eval_every": 2},
            "operators": [
                {"name": "adv", "equation": "advection", "terminal_time": 0.1,
                 "ic_family": "gaussian_mix_b", "n_query_points": 16},
                {"equation": "porous_media", "terminal_time": 0.01, "pm_degree": 3,
                 "ic_family": "fourier_b", "ic_offset": 1.0,
                 "query_dim": 2, "n_times": 2, "n_query_points": 16}
            ]
        })";
    }
    ExperimentConfig cfg = load_experiment_config(path);
    CHECK(cfg.seed == 11);
    CHECK(cfg.operators.size() == 2);
    CHECK(cfg.operators[0].name == "adv");
    CHECK(cfg.operators[0].grid.n_points == 64);
    CHECK(cfg.operators[0].grid.length == doctest::Approx(1.0));
    CHECK(cfg.operators[1].name == "porous_media");
    CHECK(cfg.operators[1].pde.pm_degree == 3);
    CHECK(cfg.operators[1].train_mesh.query_dim == 2);
    CHECK(cfg.operators[1].test_mesh.eval_time == doctest::Approx(0.01));
    CHECK(cfg.train.epochs == 7);
    CHECK(cfg.train.optimizer == OptimKind::sgd);
    CHECK(cfg.train.branch_lr == 0.02);

    std::string bad = tree.root + "/bad.json";
    {
        std::ofstream out(bad);
        out << "{ not json";
    }
    CHECK_THROWS_AS(load_experiment_config(bad), ConfigError);
    CHECK_THROWS_AS(load_experiment_config(tree.root + "/missing.json"), IoError);

    std::string noops = tree.root + "/noops.json";
    {
        std::ofstream out(noops);
        out << R"({"n_train": 4, "n_test": 2, "n_sensors": 8,
                   "basis_count": 4, "width": 8})";
    }
    CHECK_THROWS_AS(load_experiment_config(noops), ConfigError);
}

TEST_CASE("experiment: hash is stable and content-sensitive") {
    CHECK(fnv1a_hash("") == 14695981039346656037ULL);
    CHECK(fnv1a_hash("a") != fnv1a_hash("b"));
    CHECK(fnv1a_hash("abc") == fnv1a_hash("abc"));
}
