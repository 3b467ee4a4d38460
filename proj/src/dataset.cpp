#include "modno/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "modno/errors.hpp"
#include "modno/fourier.hpp"
#include "modno/metrics.hpp"
#include "modno/rng.hpp"

namespace modno {

namespace {

constexpr char kMagic[8] = {'M', 'O', 'D', 'N', 'O', 'D', 'S', '1'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "dataset io assumes a little-endian host");

int effective_mesh_points(const QueryMeshSpec& mesh, const Grid1D& grid) {
    return mesh.n_points > 0 ? mesh.n_points : grid.n_points;
}

// Spatial query coordinates: an equispaced subset of the solver grid,
// shifted by offset_cells of the solver cell.
std::vector<double> mesh_coordinates(const QueryMeshSpec& mesh, const Grid1D& grid) {
    int n_pts = effective_mesh_points(mesh, grid);
    int stride = grid.n_points / n_pts;
    std::vector<double> x(static_cast<std::size_t>(n_pts));
    for (int i = 0; i < n_pts; ++i) {
        x[static_cast<std::size_t>(i)] = (i * stride + mesh.offset_cells) * grid.spacing();
    }
    return x;
}

// Solution row evaluated at the mesh points. On-grid meshes gather directly;
// shifted meshes go through the trigonometric interpolant.
std::vector<double> sample_row_on_mesh(SpectralWorkspace& ws, const std::vector<double>& row,
                                       const QueryMeshSpec& mesh, const Grid1D& grid) {
    int n_pts = effective_mesh_points(mesh, grid);
    int stride = grid.n_points / n_pts;
    const std::vector<double>* source = &row;
    std::vector<double> shifted;
    if (mesh.offset_cells != 0.0) {
        shifted = ws.sample_shifted(row, mesh.offset_cells * grid.spacing());
        source = &shifted;
    }
    std::vector<double> out(static_cast<std::size_t>(n_pts));
    for (int i = 0; i < n_pts; ++i) {
        out[static_cast<std::size_t>(i)] = (*source)[static_cast<std::size_t>(i * stride)];
    }
    return out;
}

std::vector<double> matrix_row_vec(const Matrix& m, int r) {
    return std::vector<double>(m.row_ptr(r), m.row_ptr(r) + m.cols);
}

void write_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_f64(std::ostream& out, double v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_f64_block(std::ostream& out, const std::vector<double>& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::uint32_t read_u32(std::istream& in, const std::string& path) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw IoError("dataset: truncated file: " + path);
    return v;
}

double read_f64(std::istream& in, const std::string& path) {
    double v = 0.0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw IoError("dataset: truncated file: " + path);
    return v;
}

void read_f64_block(std::istream& in, std::vector<double>& v, const std::string& path) {
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!in) throw IoError("dataset: truncated file: " + path);
}

std::uint32_t checked_count(std::istream& in, const std::string& path, std::uint32_t max,
                            const char* what) {
    std::uint32_t v = read_u32(in, path);
    if (v == 0 || v > max) {
        throw IoError(std::string("dataset: implausible ") + what + " in " + path);
    }
    return v;
}

}  // namespace

void QueryMeshSpec::validate(const Grid1D& grid, const PdeSpec& pde) const {
    if (query_dim != 1 && query_dim != 2) {
        throw ConfigError("query mesh: query_dim must be 1 or 2");
    }
    if (n_points < 0 || (n_points > 0 && grid.n_points % n_points != 0)) {
        throw ConfigError("query mesh: n_points must divide the grid size");
    }
    if (!(offset_cells >= 0.0) || offset_cells >= 1.0) {
        throw ConfigError("query mesh: offset_cells must lie in [0, 1)");
    }
    if (query_dim == 2) {
        if (n_times < 1) throw ConfigError("query mesh: n_times must be positive");
        if (eval_time >= 0.0 && eval_time > pde.terminal_time + 1e-12) {
            throw ConfigError("query mesh: eval_time exceeds the terminal time");
        }
        if (std::isnan(eval_time)) throw ConfigError("query mesh: eval_time is NaN");
    }
}

std::vector<double> DatasetShard::sensor_locations() const {
    std::vector<double> x;
    x.reserve(sensor_indices.size());
    for (int idx : sensor_indices) x.push_back(grid.point(idx));
    return x;
}

void DatasetShard::check_consistent() const {
    grid.check_consistent();
    pde.validate();
    ic.validate();
    mesh.validate(grid, pde);
    if (split != "train" && split != "test") {
        throw ConfigError("shard: split must be 'train' or 'test'");
    }
    if (!(dt > 0.0)) throw ConfigError("shard: dt must be positive");
    if (sensor_indices.empty()) throw ConfigError("shard: no sensors");
    int prev = -1;
    for (int idx : sensor_indices) {
        if (idx <= prev || idx >= grid.n_points) {
            throw ConfigError("shard: sensor indices must be increasing grid indices");
        }
        prev = idx;
    }
    if (batch.function_count() < 1) throw ConfigError("shard: empty batch");
    batch.check_against(n_sensors(), mesh.query_dim);
}

std::vector<int> equispaced_sensor_indices(const Grid1D& grid, int n_sensors) {
    if (n_sensors < 1 || grid.n_points % n_sensors != 0) {
        throw ConfigError("sensors: count must divide the grid size");
    }
    int stride = grid.n_points / n_sensors;
    std::vector<int> idx(static_cast<std::size_t>(n_sensors));
    for (int j = 0; j < n_sensors; ++j) idx[static_cast<std::size_t>(j)] = j * stride;
    return idx;
}

DatasetShard build_shard(const PdeSpec& pde, const InitialConditionSpec& ic, int n_functions,
                         int n_sensors, const QueryMeshSpec& mesh, const Grid1D& grid,
                         std::uint64_t seed, const std::string& split) {
    grid.check_consistent();
    pde.validate();
    ic.validate();
    mesh.validate(grid, pde);
    if (n_functions < 1) throw ConfigError("build_shard: n_functions must be positive");
    if (split != "train" && split != "test") {
        throw ConfigError("build_shard: split must be 'train' or 'test'");
    }

    DatasetShard shard;
    shard.pde = pde;
    shard.ic = ic;
    shard.grid = grid;
    shard.mesh = mesh;
    shard.sensor_indices = equispaced_sensor_indices(grid, n_sensors);
    shard.split = split;

    SpectralWorkspace ws(grid.n_points, grid.length);
    std::vector<double> xs = mesh_coordinates(mesh, grid);
    int n_pts = static_cast<int>(xs.size());

    shard.batch.u_hats = Matrix(n_functions, n_sensors);
    shard.batch.queries.reserve(static_cast<std::size_t>(n_functions));

    double dt_shard = -1.0;
    for (int slot = 0; slot < n_functions; ++slot) {
        std::uint64_t slot_seed = derive_seed(seed, static_cast<std::uint64_t>(slot));
        int rejections = 0;
        std::string last_failure;
        for (int attempt = 0;; ++attempt) {
            if (rejections > 10) {
                throw Error("build_shard: slot " + std::to_string(slot) +
                            " exceeded 10 rejected draws (last failure: " + last_failure + ")");
            }
            Rng rng(derive_seed(slot_seed, static_cast<std::uint64_t>(attempt)));
            std::vector<double> u0 = sample_ic(ic, grid, rng);

            std::vector<double> times;
            if (mesh.query_dim == 2) {
                if (mesh.eval_time >= 0.0) {
                    times.assign(1, mesh.eval_time);
                } else {
                    times.resize(static_cast<std::size_t>(mesh.n_times));
                    for (double& t : times) t = rng.uniform(0.0, pde.train_time_range());
                    std::sort(times.begin(), times.end());
                }
            } else {
                times.assign(1, pde.terminal_time);
            }

            Matrix solution;
            try {
                if (dt_shard < 0.0) dt_shard = 0.5 * calibrate_dt(pde, u0, grid);
                try {
                    solution = solve_pde(pde, u0, grid, times, dt_shard);
                } catch (const SolverDivergenceError&) {
                    // The shared step was calibrated on another sample; give
                    // this one its own calibration before rejecting it.
                    solution = solve_pde(pde, u0, grid, times, 0.5 * calibrate_dt(pde, u0, grid));
                }
            } catch (const SolverDivergenceError& e) {
                ++rejections;
                last_failure = e.what();
                continue;
            }

            for (int j = 0; j < n_sensors; ++j) {
                shard.batch.u_hats(slot, j) =
                    u0[static_cast<std::size_t>(shard.sensor_indices[static_cast<std::size_t>(j)])];
            }
            QueryBatch qb;
            int n_t = solution.rows;
            qb.points = Matrix(n_pts * n_t, mesh.query_dim);
            qb.targets = Matrix(n_pts * n_t, 1);
            for (int l = 0; l < n_t; ++l) {
                std::vector<double> vals =
                    sample_row_on_mesh(ws, matrix_row_vec(solution, l), mesh, grid);
                for (int i = 0; i < n_pts; ++i) {
                    int r = l * n_pts + i;
                    qb.points(r, 0) = xs[static_cast<std::size_t>(i)];
                    if (mesh.query_dim == 2) qb.points(r, 1) = times[static_cast<std::size_t>(l)];
                    qb.targets(r, 0) = vals[static_cast<std::size_t>(i)];
                }
            }
            shard.batch.queries.push_back(std::move(qb));
            break;
        }
    }
    shard.dt = dt_shard;
    shard.batch.shared_mesh = detect_shared_mesh(shard.batch.queries);
    shard.check_consistent();
    return shard;
}

double mean_baseline_error(const DatasetShard& train_shard, const DatasetShard& test_shard) {
    if (train_shard.mesh.query_dim != 1 || test_shard.mesh.query_dim != 1) {
        throw ConfigError("mean baseline: defined for snapshot operators (query_dim 1)");
    }
    if (train_shard.batch.function_count() < 1 || test_shard.batch.function_count() < 1) {
        throw ConfigError("mean baseline: empty shard");
    }
    train_shard.check_consistent();
    test_shard.check_consistent();

    // Pointwise mean of the training targets on the training mesh.
    const OperatorBatch& tb = train_shard.batch;
    int n_train_pts = tb.queries.front().targets.rows;
    std::vector<double> mean(static_cast<std::size_t>(n_train_pts), 0.0);
    for (const QueryBatch& qb : tb.queries) {
        if (qb.targets.rows != n_train_pts) {
            throw ShapeError("mean baseline: training queries have unequal sizes");
        }
        for (int i = 0; i < n_train_pts; ++i) {
            mean[static_cast<std::size_t>(i)] += qb.targets(i, 0);
        }
    }
    for (double& v : mean) v /= tb.function_count();

    // The training mesh is equispaced, so the mean extends to arbitrary
    // points by trigonometric interpolation; the mesh offset becomes a
    // coordinate shift of the interpolant. One prediction vector serves
    // every test function.
    double length = train_shard.grid.length;
    double train_offset = train_shard.mesh.offset_cells * train_shard.grid.spacing();
    SpectralWorkspace ws(n_train_pts, length);
    std::vector<std::complex<double>> mean_hat = ws.spectrum(mean);

    const OperatorBatch& sb = test_shard.batch;
    int n_test_pts = sb.queries.front().targets.rows;
    Matrix pred(n_test_pts, 1);
    for (int i = 0; i < n_test_pts; ++i) {
        double x = sb.queries.front().points(i, 0);
        pred(i, 0) = ws.eval_interpolant(mean_hat, x - train_offset);
    }

    double total = 0.0;
    for (const QueryBatch& qb : sb.queries) {
        if (qb.targets.rows != n_test_pts || !(qb.points == sb.queries.front().points)) {
            throw ShapeError("mean baseline: test queries must share one mesh");
        }
        total += relative_l2(pred, qb.targets);
    }
    return total / sb.function_count();
}

void save_shard(const std::string& path, const DatasetShard& shard) {
    shard.check_consistent();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("dataset: cannot open for writing: " + path);

    out.write(kMagic, sizeof(kMagic));
    write_u32(out, kVersion);
    write_u32(out, static_cast<std::uint32_t>(shard.operator_id));
    write_u32(out, static_cast<std::uint32_t>(shard.pde.equation));
    write_f64(out, shard.pde.terminal_time);
    write_f64(out, shard.pde.kg_mass);
    write_f64(out, shard.pde.kg_speed);
    write_f64(out, shard.pde.sg_coupling);
    write_u32(out, static_cast<std::uint32_t>(shard.pde.pm_degree));
    write_f64(out, shard.pde.vb_viscosity);
    write_f64(out, shard.pde.kdv_dispersion);
    write_f64(out, shard.pde.ch_interface);
    write_f64(out, shard.pde.train_time_max);
    write_u32(out, static_cast<std::uint32_t>(shard.ic.family));
    write_f64(out, shard.ic.offset);
    write_f64(out, shard.ic.reference_length);
    write_f64(out, shard.grid.length);
    write_u32(out, static_cast<std::uint32_t>(shard.grid.n_points));
    write_u32(out, static_cast<std::uint32_t>(shard.mesh.query_dim));
    write_u32(out, static_cast<std::uint32_t>(shard.mesh.n_points));
    write_f64(out, shard.mesh.offset_cells);
    write_u32(out, static_cast<std::uint32_t>(shard.mesh.n_times));
    write_f64(out, shard.mesh.eval_time);
    write_u32(out, shard.split == "train" ? 0u : 1u);
    write_f64(out, shard.dt);
    write_u32(out, static_cast<std::uint32_t>(shard.sensor_indices.size()));
    for (int idx : shard.sensor_indices) write_u32(out, static_cast<std::uint32_t>(idx));
    write_u32(out, static_cast<std::uint32_t>(shard.batch.function_count()));
    write_f64_block(out, shard.batch.u_hats.data);
    for (const QueryBatch& qb : shard.batch.queries) {
        write_u32(out, static_cast<std::uint32_t>(qb.points.rows));
        write_f64_block(out, qb.points.data);
        write_f64_block(out, qb.targets.data);
    }
    if (!out) throw IoError("dataset: write failed: " + path);
}

DatasetShard load_shard(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("dataset: cannot open: " + path);

    char magic[sizeof(kMagic)] = {};
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw IoError("dataset: bad magic in " + path);
    }
    if (read_u32(in, path) != kVersion) throw IoError("dataset: unsupported version in " + path);

    DatasetShard shard;
    shard.operator_id = static_cast<int>(read_u32(in, path));
    std::uint32_t eq = read_u32(in, path);
    if (eq > static_cast<std::uint32_t>(Equation::advection)) {
        throw IoError("dataset: bad equation id in " + path);
    }
    shard.pde.equation = static_cast<Equation>(eq);
    shard.pde.terminal_time = read_f64(in, path);
    shard.pde.kg_mass = read_f64(in, path);
    shard.pde.kg_speed = read_f64(in, path);
    shard.pde.sg_coupling = read_f64(in, path);
    shard.pde.pm_degree = static_cast<int>(read_u32(in, path));
    shard.pde.vb_viscosity = read_f64(in, path);
    shard.pde.kdv_dispersion = read_f64(in, path);
    shard.pde.ch_interface = read_f64(in, path);
    shard.pde.train_time_max = read_f64(in, path);
    std::uint32_t fam = read_u32(in, path);
    if (fam > static_cast<std::uint32_t>(IcFamily::gaussian_mix_b)) {
        throw IoError("dataset: bad family id in " + path);
    }
    shard.ic.family = static_cast<IcFamily>(fam);
    shard.ic.offset = read_f64(in, path);
    shard.ic.reference_length = read_f64(in, path);
    shard.grid.length = read_f64(in, path);
    shard.grid.n_points = static_cast<int>(checked_count(in, path, 1u << 24, "grid size"));
    shard.mesh.query_dim = static_cast<int>(read_u32(in, path));
    shard.mesh.n_points = static_cast<int>(read_u32(in, path));
    shard.mesh.offset_cells = read_f64(in, path);
    shard.mesh.n_times = static_cast<int>(read_u32(in, path));
    shard.mesh.eval_time = read_f64(in, path);
    std::uint32_t split_tag = read_u32(in, path);
    if (split_tag > 1) throw IoError("dataset: bad split tag in " + path);
    shard.split = split_tag == 0 ? "train" : "test";
    shard.dt = read_f64(in, path);

    std::uint32_t n_sensors = checked_count(in, path, 1u << 24, "sensor count");
    shard.sensor_indices.resize(n_sensors);
    for (std::uint32_t j = 0; j < n_sensors; ++j) {
        shard.sensor_indices[j] = static_cast<int>(read_u32(in, path));
    }
    std::uint32_t n_functions = checked_count(in, path, 1u << 24, "function count");
    shard.batch.u_hats = Matrix(static_cast<int>(n_functions), static_cast<int>(n_sensors));
    read_f64_block(in, shard.batch.u_hats.data, path);
    shard.batch.queries.resize(n_functions);
    for (QueryBatch& qb : shard.batch.queries) {
        std::uint32_t n_q = checked_count(in, path, 1u << 28, "query count");
        qb.points = Matrix(static_cast<int>(n_q), shard.mesh.query_dim);
        read_f64_block(in, qb.points.data, path);
        qb.targets = Matrix(static_cast<int>(n_q), 1);
        read_f64_block(in, qb.targets.data, path);
    }
    shard.batch.shared_mesh = detect_shared_mesh(shard.batch.queries);
    shard.check_consistent();
    return shard;
}

}  // namespace modno
