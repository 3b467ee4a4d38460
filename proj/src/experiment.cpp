#include "modno/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "modno/errors.hpp"
#include "modno/metrics.hpp"
#include "modno/rng.hpp"

namespace modno {

namespace {

using nlohmann::json;

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string format_percent(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.2f%%", 100.0 * v);
    return buf;
}

std::vector<int> hidden_stack(int in_dim, int width, int depth, int out_dim) {
    std::vector<int> sizes;
    sizes.push_back(in_dim);
    for (int l = 0; l < depth; ++l) sizes.push_back(width);
    sizes.push_back(out_dim);
    return sizes;
}

// Forward+backward multiply count of one query through the net: the forward
// pass is one multiply per weight, the backward roughly two.
double pass_cost(const std::vector<int>& sizes) {
    double total = 0.0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        total += static_cast<double>(sizes[l]) * static_cast<double>(sizes[l + 1]);
    }
    return 3.0 * total;
}

OperatorSetup parse_operator(const json& j, int default_grid_points) {
    OperatorSetup op;
    if (!j.contains("equation")) throw ConfigError("config: operator missing 'equation'");
    op.pde.equation = equation_from_string(j.at("equation").get<std::string>());
    op.name = j.value("name", equation_name(op.pde.equation));
    op.pde.terminal_time = j.value("terminal_time", op.pde.terminal_time);
    op.pde.kg_mass = j.value("kg_mass", op.pde.kg_mass);
    op.pde.kg_speed = j.value("kg_speed", op.pde.kg_speed);
    op.pde.sg_coupling = j.value("sg_coupling", op.pde.sg_coupling);
    op.pde.pm_degree = j.value("pm_degree", op.pde.pm_degree);
    op.pde.vb_viscosity = j.value("vb_viscosity", op.pde.vb_viscosity);
    op.pde.kdv_dispersion = j.value("kdv_dispersion", op.pde.kdv_dispersion);
    op.pde.ch_interface = j.value("ch_interface", op.pde.ch_interface);
    op.pde.train_time_max = j.value("train_time_max", op.pde.train_time_max);

    if (!j.contains("ic_family")) throw ConfigError("config: operator missing 'ic_family'");
    op.ic.family = ic_family_from_string(j.at("ic_family").get<std::string>());
    op.ic.offset = j.value("ic_offset", 0.0);
    op.ic.reference_length = j.value("ic_reference_length", 0.0);

    double length = j.value("domain_length", 0.0);
    if (length <= 0.0) length = op.pde.default_domain_length();
    op.grid = Grid1D{length, j.value("grid_points", default_grid_points)};

    int query_dim = j.value("query_dim", 1);
    int n_query_points = j.value("n_query_points", 0);
    op.train_mesh.query_dim = query_dim;
    op.train_mesh.n_points = n_query_points;
    op.train_mesh.offset_cells = 0.0;
    op.train_mesh.n_times = j.value("n_times", 1);
    op.train_mesh.eval_time = -1.0;

    op.test_mesh.query_dim = query_dim;
    op.test_mesh.n_points = n_query_points;
    op.test_mesh.offset_cells = 0.5;
    op.test_mesh.n_times = 1;
    if (query_dim == 2) {
        double eval_time = j.value("eval_time", -1.0);
        op.test_mesh.eval_time = eval_time < 0.0 ? op.pde.terminal_time : eval_time;
    } else {
        op.test_mesh.eval_time = -1.0;
    }
    return op;
}

TrainConfig parse_train(const json& j) {
    TrainConfig cfg;
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.trunk_lr = j.value("trunk_lr", cfg.trunk_lr);
    cfg.branch_lr = j.value("branch_lr", cfg.branch_lr);
    if (j.contains("trunk_lrs")) cfg.trunk_lrs = j.at("trunk_lrs").get<std::vector<double>>();
    cfg.minibatch_size = j.value("minibatch_size", cfg.minibatch_size);
    if (j.contains("optimizer")) {
        cfg.optimizer = optim_from_string(j.at("optimizer").get<std::string>());
    }
    if (j.contains("subsample_mode")) {
        cfg.subsample_mode = subsample_mode_from_string(j.at("subsample_mode").get<std::string>());
    }
    cfg.eval_every = j.value("eval_every", cfg.eval_every);
    return cfg;
}

void write_partial_csv(const ResultsTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) return;
    out << "meta,experiment," << table.experiment_id << "\n";
    out << "meta,seed," << table.seed << "\n";
    out << "meta,config_hash," << table.config_hash << "\n";
    out << "meta,q_values";
    for (double q : table.q_values) out << "," << format_g17(q);
    out << "\n";
    out << "meta,cost_ratios";
    for (double r : table.cost_ratios) out << "," << format_g17(r);
    out << "\n";
    for (std::size_t i = 0; i < table.operator_names.size(); ++i) {
        out << "row," << table.operator_names[i];
        if (i < table.single_errors.size()) out << "," << format_g17(table.single_errors[i]);
        for (int c = 0; c < table.modno_errors.cols; ++c) {
            if (static_cast<int>(i) < table.modno_errors.rows) {
                out << "," << format_g17(table.modno_errors(static_cast<int>(i), c));
            }
        }
        out << "\n";
    }
}

}  // namespace

void ExperimentConfig::validate() const {
    if (operators.empty()) throw ConfigError("config: no operators");
    if (experiment_id == "exp1" || experiment_id == "exp2" || experiment_id == "exp3" ||
        experiment_id == "exp4") {
        if (operators.size() != 3) {
            throw ConfigError("config: " + experiment_id + " must list exactly 3 operators");
        }
    } else if (experiment_id == "exp5") {
        if (operators.size() != 4) {
            throw ConfigError("config: exp5 must list exactly 4 operators");
        }
    }
    if (n_train < 1 || n_test < 1) throw ConfigError("config: dataset sizes must be positive");
    if (n_sensors < 1) throw ConfigError("config: n_sensors must be positive");
    if (basis_count < 1 || width < 1 || depth < 1) {
        throw ConfigError("config: network sizes must be positive");
    }
    for (double q : q_sweep) {
        if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("config: q values must lie in [0, 1]");
    }
    for (const OperatorSetup& op : operators) {
        op.pde.validate();
        op.ic.validate();
        op.grid.check_consistent();
        op.train_mesh.validate(op.grid, op.pde);
        op.test_mesh.validate(op.grid, op.pde);
    }
    train.validate(static_cast<int>(operators.size()));
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("config: cannot open: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config: invalid JSON in " + path + ": " + e.what());
    }
    try {
        ExperimentConfig cfg;
        cfg.experiment_id = j.value("experiment", cfg.experiment_id);
        cfg.seed = j.value("seed", cfg.seed);
        cfg.n_train = j.value("n_train", cfg.n_train);
        cfg.n_test = j.value("n_test", cfg.n_test);
        cfg.n_sensors = j.value("n_sensors", cfg.n_sensors);
        cfg.basis_count = j.value("basis_count", cfg.basis_count);
        cfg.width = j.value("width", cfg.width);
        cfg.depth = j.value("depth", cfg.depth);
        if (j.contains("activation")) {
            cfg.activation = activation_from_string(j.at("activation").get<std::string>());
        }
        cfg.out_root = j.value("out_root", cfg.out_root);
        if (j.contains("q_sweep")) cfg.q_sweep = j.at("q_sweep").get<std::vector<double>>();
        if (j.contains("train")) cfg.train = parse_train(j.at("train"));
        int default_grid_points = j.value("grid_points", 256);
        if (!j.contains("operators") || !j.at("operators").is_array()) {
            throw ConfigError("config: missing 'operators' array");
        }
        for (const json& op : j.at("operators")) {
            cfg.operators.push_back(parse_operator(op, default_grid_points));
        }
        cfg.validate();
        return cfg;
    } catch (const json::exception& e) {
        throw ConfigError("config: bad field in " + path + ": " + e.what());
    }
}

std::uint64_t fnv1a_hash(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

void ResultsTable::validate() const {
    std::size_t n_ops = operator_names.size();
    if (n_ops == 0) throw ConfigError("results: no operators");
    if (single_errors.size() != n_ops) throw ConfigError("results: single column size mismatch");
    if (modno_errors.rows != static_cast<int>(n_ops) ||
        modno_errors.cols != static_cast<int>(q_values.size())) {
        throw ConfigError("results: error matrix shape mismatch");
    }
    if (cost_ratios.size() != q_values.size()) throw ConfigError("results: cost column mismatch");
    auto check_cell = [](double v) {
        if (!std::isfinite(v) || v < 0.0) throw ConfigError("results: cells must be finite and >= 0");
    };
    for (double v : single_errors) check_cell(v);
    for (double v : modno_errors.data) check_cell(v);
    for (double v : cost_ratios) check_cell(v);
}

void write_results_csv(const ResultsTable& table, const std::string& path) {
    table.validate();
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("results: cannot open for writing: " + path);
    out << "meta,experiment," << table.experiment_id << "\n";
    out << "meta,seed," << table.seed << "\n";
    out << "meta,config_hash," << table.config_hash << "\n";
    out << "meta,q_values";
    for (double q : table.q_values) out << "," << format_g17(q);
    out << "\n";
    out << "meta,cost_ratios";
    for (double r : table.cost_ratios) out << "," << format_g17(r);
    out << "\n";
    for (std::size_t i = 0; i < table.operator_names.size(); ++i) {
        out << "row," << table.operator_names[i] << ","
            << format_g17(table.single_errors[i]);
        for (int c = 0; c < table.modno_errors.cols; ++c) {
            out << "," << format_g17(table.modno_errors(static_cast<int>(i), c));
        }
        out << "\n";
    }
    if (!out) throw IoError("results: write failed: " + path);
}

ResultsTable read_results_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("results: cannot open: " + path);
    ResultsTable table;
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() < 2) throw IoError("results: malformed line in " + path);
        if (cells[0] == "meta") {
            if (cells[1] == "experiment" && cells.size() > 2) table.experiment_id = cells[2];
            else if (cells[1] == "seed" && cells.size() > 2) table.seed = std::stoull(cells[2]);
            else if (cells[1] == "config_hash" && cells.size() > 2) table.config_hash = cells[2];
            else if (cells[1] == "q_values") {
                for (std::size_t c = 2; c < cells.size(); ++c) {
                    table.q_values.push_back(std::stod(cells[c]));
                }
            } else if (cells[1] == "cost_ratios") {
                for (std::size_t c = 2; c < cells.size(); ++c) {
                    table.cost_ratios.push_back(std::stod(cells[c]));
                }
            }
        } else if (cells[0] == "row") {
            if (cells.size() < 3) throw IoError("results: malformed row in " + path);
            table.operator_names.push_back(cells[1]);
            table.single_errors.push_back(std::stod(cells[2]));
            std::vector<double> modno;
            for (std::size_t c = 3; c < cells.size(); ++c) modno.push_back(std::stod(cells[c]));
            rows.push_back(std::move(modno));
        } else {
            throw IoError("results: unknown record '" + cells[0] + "' in " + path);
        }
    }
    table.modno_errors =
        Matrix(static_cast<int>(rows.size()), static_cast<int>(table.q_values.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != table.q_values.size()) {
            throw IoError("results: row width mismatch in " + path);
        }
        for (std::size_t c = 0; c < rows[i].size(); ++c) {
            table.modno_errors(static_cast<int>(i), static_cast<int>(c)) = rows[i][c];
        }
    }
    table.validate();
    return table;
}

void write_results_markdown(const ResultsTable& table, const std::string& path) {
    table.validate();
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("results: cannot open for writing: " + path);
    out << "| Operator | Single model 100% data |";
    for (double q : table.q_values) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%g", 100.0 * q);
        out << " MODNO " << buf << "% data |";
    }
    out << "\n|---|---|";
    for (std::size_t c = 0; c < table.q_values.size(); ++c) out << "---|";
    out << "\n";
    for (std::size_t i = 0; i < table.operator_names.size(); ++i) {
        out << "| " << table.operator_names[i] << " | "
            << format_percent(table.single_errors[i]) << " |";
        for (int c = 0; c < table.modno_errors.cols; ++c) {
            out << " " << format_percent(table.modno_errors(static_cast<int>(i), c)) << " |";
        }
        out << "\n";
    }
    out << "| cost ratio | 1.00 |";
    for (double r : table.cost_ratios) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.4f", r);
        out << " " << buf << " |";
    }
    out << "\n";
    if (!out) throw IoError("results: write failed: " + path);
}

double evaluate_don(const DonModel& model, const OperatorBatch& batch) {
    batch.check_against(model.n_sensors, model.query_dim);
    if (batch.function_count() == 0) throw ConfigError("evaluate: empty batch");
    double total = 0.0;
    for (int f = 0; f < batch.function_count(); ++f) {
        Matrix u_hat = gather_rows(batch.u_hats, {f});
        const QueryBatch& qb = batch.queries[static_cast<std::size_t>(f)];
        Matrix pred = don_predict(model, u_hat, qb.points);
        total += relative_l2(pred, qb.targets);
    }
    return total / batch.function_count();
}

void emit_solution_plotdata(const ModnoModel& model, int op_index, const DatasetShard& shard,
                            const std::vector<int>& sample_indices, const std::string& path) {
    shard.check_consistent();
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("plotdata: cannot open for writing: " + path);
    int d = shard.mesh.query_dim;
    out << (d == 2 ? "# x t target prediction\n" : "# x target prediction\n");
    for (int idx : sample_indices) {
        if (idx < 0 || idx >= shard.batch.function_count()) {
            throw IndexError("plotdata: sample index out of range");
        }
        const QueryBatch& qb = shard.batch.queries[static_cast<std::size_t>(idx)];
        Matrix u_hat = gather_rows(shard.batch.u_hats, {idx});
        Matrix pred = modno_predict(model, op_index, u_hat, qb.points);
        out << "# sample " << idx << "\n";
        for (int r = 0; r < qb.points.rows; ++r) {
            out << format_g17(qb.points(r, 0));
            if (d == 2) out << " " << format_g17(qb.points(r, 1));
            out << " " << format_g17(qb.targets(r, 0)) << " " << format_g17(pred(r, 0)) << "\n";
        }
    }
    if (!out) throw IoError("plotdata: write failed: " + path);
}

CostLedger build_cost_ledger(const ExperimentConfig& cfg,
                             const std::vector<DatasetShard>& train_shards, double q) {
    CostLedger ledger;
    ledger.q = q;
    ledger.epochs = cfg.train.epochs;
    ledger.shared_pass_cost =
        pass_cost(hidden_stack(cfg.n_sensors, cfg.width, cfg.depth, cfg.basis_count));
    for (const DatasetShard& shard : train_shards) {
        OperatorCost op;
        op.dedicated_pass_cost =
            pass_cost(hidden_stack(shard.mesh.query_dim, cfg.width, cfg.depth, cfg.basis_count));
        for (const QueryBatch& qb : shard.batch.queries) {
            op.queries_per_function.push_back(qb.targets.rows);
        }
        ledger.operators.push_back(std::move(op));
    }
    compute_costs(ledger);
    return ledger;
}

CostLedger build_cost_ledger_from_config(const ExperimentConfig& cfg, double q) {
    cfg.validate();
    CostLedger ledger;
    ledger.q = q;
    ledger.epochs = cfg.train.epochs;
    ledger.shared_pass_cost =
        pass_cost(hidden_stack(cfg.n_sensors, cfg.width, cfg.depth, cfg.basis_count));
    for (const OperatorSetup& op : cfg.operators) {
        const QueryMeshSpec& mesh = op.train_mesh;
        std::int64_t rows = mesh.n_points == 0 ? op.grid.n_points : mesh.n_points;
        if (mesh.query_dim == 2) rows *= mesh.eval_time >= 0.0 ? 1 : mesh.n_times;
        OperatorCost oc;
        oc.dedicated_pass_cost =
            pass_cost(hidden_stack(mesh.query_dim, cfg.width, cfg.depth, cfg.basis_count));
        oc.queries_per_function.assign(static_cast<std::size_t>(cfg.n_train), rows);
        ledger.operators.push_back(std::move(oc));
    }
    compute_costs(ledger);
    return ledger;
}

DatasetShard build_operator_shard(const ExperimentConfig& cfg, int op_index,
                                  const std::string& split) {
    if (op_index < 0 || op_index >= static_cast<int>(cfg.operators.size()))
        throw IndexError("build_operator_shard: operator index out of range");
    const OperatorSetup& op = cfg.operators[static_cast<std::size_t>(op_index)];
    bool is_train = split == "train";
    DatasetShard shard = build_shard(
        op.pde, op.ic, is_train ? cfg.n_train : cfg.n_test, cfg.n_sensors,
        is_train ? op.train_mesh : op.test_mesh, op.grid,
        derive_seed(cfg.seed, static_cast<std::uint64_t>(2 * op_index + (is_train ? 0 : 1))),
        split);
    shard.operator_id = op_index;
    return shard;
}

ModnoModel init_modno_model(const ExperimentConfig& cfg) {
    ModnoModel init;
    init.n_sensors = cfg.n_sensors;
    init.basis_count = cfg.basis_count;
    init.shared_branch = mlp_init(hidden_stack(cfg.n_sensors, cfg.width, cfg.depth, cfg.basis_count),
                                  cfg.activation, derive_seed(cfg.seed, 200));
    for (std::size_t i = 0; i < cfg.operators.size(); ++i) {
        int d = cfg.operators[i].train_mesh.query_dim;
        init.query_dims.push_back(d);
        init.trunks.push_back(mlp_init(hidden_stack(d, cfg.width, cfg.depth, cfg.basis_count),
                                       cfg.activation,
                                       derive_seed(cfg.seed, 201 + static_cast<std::uint64_t>(i))));
    }
    return init;
}

ExperimentArtifacts run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    int n_ops = static_cast<int>(cfg.operators.size());

    // Content-hash the configuration into the directory name: distinct
    // configurations get distinct directories, identical reruns land in the
    // same one.
    json fingerprint;
    fingerprint["experiment"] = cfg.experiment_id;
    fingerprint["seed"] = cfg.seed;
    fingerprint["n_train"] = cfg.n_train;
    fingerprint["n_test"] = cfg.n_test;
    fingerprint["n_sensors"] = cfg.n_sensors;
    fingerprint["basis_count"] = cfg.basis_count;
    fingerprint["width"] = cfg.width;
    fingerprint["depth"] = cfg.depth;
    fingerprint["activation"] = activation_name(cfg.activation);
    fingerprint["epochs"] = cfg.train.epochs;
    fingerprint["trunk_lr"] = cfg.train.trunk_lr;
    fingerprint["branch_lr"] = cfg.train.branch_lr;
    fingerprint["minibatch"] = cfg.train.minibatch_size;
    fingerprint["optimizer"] = optim_name(cfg.train.optimizer);
    fingerprint["q_sweep"] = cfg.q_sweep;
    for (const OperatorSetup& op : cfg.operators) {
        json jo;
        jo["name"] = op.name;
        jo["equation"] = equation_name(op.pde.equation);
        jo["terminal_time"] = op.pde.terminal_time;
        jo["train_time_max"] = op.pde.train_time_max;
        jo["pm_degree"] = op.pde.pm_degree;
        jo["ic_family"] = ic_family_name(op.ic.family);
        jo["ic_offset"] = op.ic.offset;
        jo["grid_points"] = op.grid.n_points;
        jo["query_dim"] = op.train_mesh.query_dim;
        jo["n_times"] = op.train_mesh.n_times;
        jo["eval_time"] = op.test_mesh.eval_time;
        fingerprint["operators"].push_back(jo);
    }
    char hash_hex[20];
    std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                  static_cast<unsigned long long>(fnv1a_hash(fingerprint.dump())));

    std::filesystem::path out_dir =
        std::filesystem::path(cfg.out_root) / (cfg.experiment_id + "-" + hash_hex);
    std::filesystem::create_directories(out_dir / "data");

    ResultsTable table;
    table.experiment_id = cfg.experiment_id;
    table.seed = cfg.seed;
    table.config_hash = hash_hex;
    table.q_values = cfg.q_sweep;
    table.modno_errors = Matrix(n_ops, static_cast<int>(cfg.q_sweep.size()));
    for (const OperatorSetup& op : cfg.operators) table.operator_names.push_back(op.name);

    auto run_stage = [&](const char* name, auto&& body) {
        try {
            body();
        } catch (const std::exception& e) {
            write_partial_csv(table, (out_dir / "partial_results.csv").string());
            throw Error("run_experiment[" + std::string(name) + "]: " + e.what());
        }
    };

    // Stage a: datasets.
    std::vector<DatasetShard> train_shards, test_shards;
    run_stage("datagen", [&] {
        for (int i = 0; i < n_ops; ++i) {
            const OperatorSetup& op = cfg.operators[static_cast<std::size_t>(i)];
            DatasetShard tr = build_operator_shard(cfg, i, "train");
            DatasetShard te = build_operator_shard(cfg, i, "test");
            save_shard((out_dir / "data" / (op.name + "_train.bin")).string(), tr);
            save_shard((out_dir / "data" / (op.name + "_test.bin")).string(), te);
            train_shards.push_back(std::move(tr));
            test_shards.push_back(std::move(te));
        }
    });

    // Stage b: one single-operator model per operator on its full shard.
    run_stage("single", [&] {
        for (int i = 0; i < n_ops; ++i) {
            DonModel model;
            model.n_sensors = cfg.n_sensors;
            model.basis_count = cfg.basis_count;
            model.query_dim = cfg.operators[static_cast<std::size_t>(i)].train_mesh.query_dim;
            model.branch =
                mlp_init(hidden_stack(cfg.n_sensors, cfg.width, cfg.depth, cfg.basis_count),
                         cfg.activation, derive_seed(cfg.seed, 100 + static_cast<std::uint64_t>(i)));
            model.trunk =
                mlp_init(hidden_stack(model.query_dim, cfg.width, cfg.depth, cfg.basis_count),
                         cfg.activation, derive_seed(cfg.seed, 150 + static_cast<std::uint64_t>(i)));
            TrainConfig tc = cfg.train;
            tc.shared_data_fraction = 1.0;
            tc.rng_seed = derive_seed(cfg.seed, 300 + static_cast<std::uint64_t>(i));
            ShardView view{&train_shards[static_cast<std::size_t>(i)].batch,
                           &test_shards[static_cast<std::size_t>(i)].batch};
            DonTrainResult result = train_single_don(std::move(model), view, tc);
            table.single_errors.push_back(
                evaluate_don(result.model, test_shards[static_cast<std::size_t>(i)].batch));
            result.history.write_csv(
                (out_dir / ("history_single_" + table.operator_names[static_cast<std::size_t>(i)] +
                            ".csv"))
                    .string());
        }
    });

    // Stage c+d: one MODNO per q from a shared initialization, evaluated on
    // the off-grid test shards.
    ModnoModel first_q_model;
    bool have_first_q = false;
    run_stage("modno", [&] {
        ModnoModel init = init_modno_model(cfg);
        std::vector<ShardView> views;
        for (int i = 0; i < n_ops; ++i) {
            views.push_back(ShardView{&train_shards[static_cast<std::size_t>(i)].batch,
                                      &test_shards[static_cast<std::size_t>(i)].batch});
        }
        for (std::size_t qi = 0; qi < cfg.q_sweep.size(); ++qi) {
            TrainConfig tc = cfg.train;
            tc.shared_data_fraction = cfg.q_sweep[qi];
            tc.rng_seed = derive_seed(cfg.seed, 400 + static_cast<std::uint64_t>(qi));
            ModnoTrainResult result = train_modno(init, views, tc);
            for (int i = 0; i < n_ops; ++i) {
                table.modno_errors(i, static_cast<int>(qi)) = evaluate_modno(
                    result.model, i, test_shards[static_cast<std::size_t>(i)].batch);
            }
            char qbuf[24];
            std::snprintf(qbuf, sizeof(qbuf), "%g", cfg.q_sweep[qi]);
            result.history.write_csv(
                (out_dir / ("history_modno_q" + std::string(qbuf) + ".csv")).string());
            if (qi == 0) {
                first_q_model = std::move(result.model);
                have_first_q = true;
            }
        }
    });

    // Stage e: cost ledger per q.
    run_stage("cost", [&] {
        for (double q : cfg.q_sweep) {
            CostLedger ledger = build_cost_ledger(cfg, train_shards, q);
            table.cost_ratios.push_back(ledger.c_mol / ledger.c_sol);
        }
    });

    // Stage f: results table and per-operator plot data.
    run_stage("emit", [&] {
        write_results_csv(table, (out_dir / "results.csv").string());
        write_results_markdown(table, (out_dir / "results.md").string());
        if (have_first_q) {
            for (int i = 0; i < n_ops; ++i) {
                emit_solution_plotdata(
                    first_q_model, i, test_shards[static_cast<std::size_t>(i)], {0},
                    (out_dir /
                     ("solution_" + table.operator_names[static_cast<std::size_t>(i)] + ".txt"))
                        .string());
            }
        }
    });

    return ExperimentArtifacts{std::move(table), out_dir.string()};
}

}  // namespace modno
