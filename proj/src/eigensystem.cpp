#include "fsb/eigensystem.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fsb/errors.hpp"
#include "fsb/linops.hpp"
#include "fsb/serialize.hpp"

#include <nlohmann/json.hpp>

namespace fsb {

namespace {

// 1d cosine table: rows n = 0..M-1 evaluated at the grid's cell centers along
// dimension d, normalized so that sum_i h * row_n[i] * row_m[i] = delta_nm.
MatrixRM cosine_table_1d(const GridSpec& g, int dim, int modes) {
    const int R = g.res[dim];
    const double L = g.extent(dim);
    MatrixRM tab(modes, R);
    for (int n = 0; n < modes; ++n) {
        const double norm = std::sqrt((n == 0 ? 1.0 : 2.0) / L);
        for (int i = 0; i < R; ++i) {
            const double x = (i + 0.5) * g.spacing(dim);  // relative to lower bound
            tab(n, i) = norm * std::cos(std::numbers::pi * n * x / L);
        }
    }
    return tab;
}

std::string grid_key(const GridSpec& g, bool nystrom) {
    std::ostringstream os;
    os << g.dims << ':' << g.res[0] << 'x' << g.res[1];
    for (int d = 0; d < g.dims; ++d)
        os << ':' << format_double(g.bounds[d][0]) << ',' << format_double(g.bounds[d][1]);
    os << (nystrom ? ":ny" : "");
    return os.str();
}

void fix_eigvec_sign(Eigen::VectorXd& v) {
    int imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v[imax] < 0) v = -v;
}

}  // namespace

MatrixRM cosine_mode_matrix(const GridSpec& g, int modes_per_dim) {
    for (int d = 0; d < g.dims; ++d)
        if (modes_per_dim > g.res[d])
            throw ConfigError("cosine basis: modes_per_dim exceeds grid resolution");
    if (g.dims == 1) return cosine_table_1d(g, 0, modes_per_dim);
    const MatrixRM tx = cosine_table_1d(g, 0, modes_per_dim);
    const MatrixRM ty = cosine_table_1d(g, 1, modes_per_dim);
    const int M = modes_per_dim;
    MatrixRM out(M * M, g.num_points());
    for (int n = 0; n < M; ++n)
        for (int m = 0; m < M; ++m) {
            double* row = out.data() + static_cast<long>(n * M + m) * g.num_points();
            for (int ix = 0; ix < g.res[0]; ++ix)
                for (int iy = 0; iy < g.res[1]; ++iy)
                    row[ix * g.res[1] + iy] = tx(n, ix) * ty(m, iy);
        }
    return out;
}

double rbf_kernel(double d2, double gamma) { return std::exp(-d2 / gamma); }

EigenSystemPtr build_cosine_basis_2d(const GridSpec& grid, int modes_per_dim,
                                     double decay_floor) {
    grid.validate();
    if (grid.dims != 2) throw ConfigError("build_cosine_basis_2d: grid must be 2d");
    if (modes_per_dim < 1) throw ConfigError("build_cosine_basis_2d: modes_per_dim must be >= 1");
    if (modes_per_dim > grid.res[0] || modes_per_dim > grid.res[1])
        throw ConfigError("build_cosine_basis_2d: modes exceed resolution");
    if (decay_floor <= 0.0) throw ConfigError("build_cosine_basis_2d: decay_floor must be > 0");

    auto es = std::make_shared<EigenSystem>();
    es->kind = BasisKind::AnalyticCosine;
    es->grid = grid;
    es->modes_per_dim = modes_per_dim;
    es->K = modes_per_dim * modes_per_dim;
    es->basis = cosine_mode_matrix(grid, modes_per_dim);
    es->a.resize(es->K);
    es->lam = Eigen::VectorXd::Ones(es->K);
    const double W = grid.extent(0), H = grid.extent(1);
    const double pi2 = std::numbers::pi * std::numbers::pi;
    for (int n = 0; n < modes_per_dim; ++n)
        for (int m = 0; m < modes_per_dim; ++m)
            es->a[n * modes_per_dim + m] =
                std::max(pi2 * (n * n / (W * W) + m * m / (H * H)), decay_floor);
    return es;
}

EigenSystemPtr build_kernel_basis_1d(const GridSpec& grid, double gamma, double jitter) {
    grid.validate();
    if (grid.dims != 1) throw ConfigError("build_kernel_basis_1d: grid must be 1d");
    if (gamma <= 0.0) throw ConfigError("build_kernel_basis_1d: gamma must be > 0");

    const int N = grid.num_points();
    const double h = grid.cell_volume();
    Eigen::MatrixXd gram(N, N);
    for (int i = 0; i < N; ++i) {
        const double xi = grid.point(i)[0];
        for (int j = 0; j <= i; ++j) {
            const double d = xi - grid.point(j)[0];
            gram(i, j) = gram(j, i) = h * rbf_kernel(d * d, gamma);
        }
    }
    if (jitter < 0.0) jitter = 1e-8 * gram.trace() / N;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
    if (solver.info() != Eigen::Success)
        throw NumericError("build_kernel_basis_1d: eigendecomposition failed");
    if (solver.eigenvalues().minCoeff() < -jitter)
        throw NumericError("build_kernel_basis_1d: Gram matrix not PSD beyond jitter");

    // eigenvalues ascending; retain > jitter, store descending
    std::vector<int> keep;
    for (int i = N - 1; i >= 0; --i)
        if (solver.eigenvalues()[i] > jitter) keep.push_back(i);
    if (keep.empty()) throw NumericError("build_kernel_basis_1d: no eigenvalues above jitter");

    auto es = std::make_shared<EigenSystem>();
    es->kind = BasisKind::NumericalKernel;
    es->grid = grid;
    es->gamma = gamma;
    es->K = static_cast<int>(keep.size());
    es->a = Eigen::VectorXd::Constant(es->K, 0.5);
    es->lam.resize(es->K);
    es->basis.resize(es->K, N);
    const double inv_sqrt_h = 1.0 / std::sqrt(h);
    for (int k = 0; k < es->K; ++k) {
        es->lam[k] = solver.eigenvalues()[keep[k]];
        Eigen::VectorXd v = solver.eigenvectors().col(keep[k]);
        fix_eigvec_sign(v);
        es->basis.row(k) = (inv_sqrt_h * v).transpose();
    }
    return es;
}

const MatrixRM& EigenSystem::eval_matrix(const GridSpec& target, bool nystrom) const {
    if (target == grid) return basis;
    if (target.dims != grid.dims)
        throw ConfigError("eval_matrix: target dimensionality differs from basis grid");
    for (int d = 0; d < grid.dims; ++d)
        if (target.bounds[d] != grid.bounds[d])
            throw ConfigError("eval_matrix: target domain differs from basis domain");
    if (kind == BasisKind::NumericalKernel && !nystrom)
        throw ConfigError(
            "eval_matrix: numerical-kernel basis requires the training grid "
            "(request Nystrom extension for off-grid evaluation)");

    const std::string key = grid_key(target, nystrom);
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = eval_cache_.find(key);
    if (it != eval_cache_.end()) return *it->second;

    auto mat = std::make_unique<MatrixRM>();
    if (kind == BasisKind::AnalyticCosine) {
        *mat = cosine_mode_matrix(target, modes_per_dim);
    } else {
        // Nystrom: phi_k(x) = (1/lam_k) sum_i h k(x, p_i) phi_k(p_i)
        const int N = grid.num_points(), Nt = target.num_points();
        const double h = grid.cell_volume();
        MatrixRM cross(N, Nt);
        for (int i = 0; i < N; ++i) {
            const double pi_ = grid.point(i)[0];
            for (int j = 0; j < Nt; ++j) {
                const double d = pi_ - target.point(j)[0];
                cross(i, j) = h * rbf_kernel(d * d, gamma);
            }
        }
        mat->noalias() = lam.cwiseInverse().asDiagonal() * basis * cross;
    }
    const MatrixRM& ref = *mat;
    eval_cache_.emplace(key, std::move(mat));
    return ref;
}

SpectralField to_spectral(const GridField& f, EigenSystemPtr eigs) {
    if (!(f.grid == eigs->grid)) throw ConfigError("to_spectral: field grid does not match basis grid");
    SpectralField out{std::move(eigs), Eigen::VectorXd(0)};
    out.coeffs.resize(out.eigs->K);
    gemv(out.eigs->basis, f.values.data(), out.coeffs.data());
    out.coeffs *= f.grid.cell_volume();
    return out;
}

GridField from_spectral(const SpectralField& c, const GridSpec& target, bool nystrom) {
    if (c.coeffs.size() != c.eigs->K) throw ConfigError("from_spectral: coefficient count mismatch");
    const MatrixRM& E = c.eigs->eval_matrix(target, nystrom);
    GridField out;
    out.grid = target;
    out.values.resize(target.num_points());
    gemv_t(E, c.coeffs.data(), out.values.data());
    return out;
}

GridField resample_initial(const GridField& f, const GridSpec& target, ResampleMethod method) {
    if (f.grid.dims != target.dims)
        throw ConfigError("resample_initial: dimensionality mismatch");
    if (f.grid == target) return f;

    if (method == ResampleMethod::Bilinear) {
        for (int d = 0; d < target.dims; ++d)
            if (target.res[d] < f.grid.res[d])
                throw ConfigError(
                    "resample_initial: bilinear downsampling rejected, use spectral truncation");
        const GridSpec& src = f.grid;
        Eigen::VectorXd vals(target.num_points());
        // clamp-to-edge linear interpolation on cell-center lattices
        auto locate = [&](double x, int d, int& i0, double& frac) {
            const double u = (x - src.bounds[d][0]) / src.spacing(d) - 0.5;
            i0 = static_cast<int>(std::floor(u));
            frac = u - i0;
            if (i0 < 0) { i0 = 0; frac = 0.0; }
            if (i0 >= src.res[d] - 1) { i0 = src.res[d] - 2; frac = 1.0; }
        };
        for (int i = 0; i < target.num_points(); ++i) {
            const auto p = target.point(i);
            int ix;
            double fx;
            locate(p[0], 0, ix, fx);
            if (target.dims == 1) {
                vals[i] = (1 - fx) * f.values[ix] + fx * f.values[ix + 1];
            } else {
                int iy;
                double fy;
                locate(p[1], 1, iy, fy);
                const int r1 = src.res[1];
                const double v00 = f.values[ix * r1 + iy], v01 = f.values[ix * r1 + iy + 1];
                const double v10 = f.values[(ix + 1) * r1 + iy], v11 = f.values[(ix + 1) * r1 + iy + 1];
                vals[i] = (1 - fx) * ((1 - fy) * v00 + fy * v01) + fx * ((1 - fy) * v10 + fy * v11);
            }
        }
        return GridField(target, std::move(vals));
    }

    // spectral: full cosine transform truncated to the modes both grids support
    int modes = std::min(f.grid.res[0], target.res[0]);
    for (int d = 1; d < target.dims; ++d)
        modes = std::min({modes, f.grid.res[d], target.res[d]});
    const MatrixRM src_modes = cosine_mode_matrix(f.grid, modes);
    Eigen::VectorXd coeffs(src_modes.rows());
    gemv(src_modes, f.values.data(), coeffs.data());
    coeffs *= f.grid.cell_volume();
    const MatrixRM tgt_modes = cosine_mode_matrix(target, modes);
    Eigen::VectorXd vals(target.num_points());
    gemv_t(tgt_modes, coeffs.data(), vals.data());
    return GridField(target, std::move(vals));
}

nlohmann::ordered_json eigensystem_to_json(const EigenSystem& es) {
    nlohmann::ordered_json j;
    j["version"] = 1;
    j["kind"] = es.kind == BasisKind::AnalyticCosine ? "analytic-cosine" : "numerical-kernel";
    j["K"] = es.K;
    j["a"] = std::vector<double>(es.a.data(), es.a.data() + es.K);
    j["lam"] = std::vector<double>(es.lam.data(), es.lam.data() + es.K);
    j["grid"] = {{"dims", es.grid.dims},
                 {"res", std::vector<int>(es.grid.res.begin(), es.grid.res.begin() + es.grid.dims)},
                 {"bounds", [&] {
                      std::vector<std::vector<double>> b;
                      for (int d = 0; d < es.grid.dims; ++d)
                          b.push_back({es.grid.bounds[d][0], es.grid.bounds[d][1]});
                      return b;
                  }()}};
    j["basis"] = base64_encode(es.basis.data(), static_cast<size_t>(es.K) * es.grid.num_points());
    if (es.kind == BasisKind::AnalyticCosine)
        j["extra"] = {{"modes_per_dim", es.modes_per_dim}};
    else
        j["extra"] = {{"gamma", es.gamma}};
    return j;
}

EigenSystemPtr eigensystem_from_json(const nlohmann::json& j) {
    if (j.at("version").get<int>() != 1) throw ConfigError("eigensystem: unsupported version");
    auto es = std::make_shared<EigenSystem>();
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "analytic-cosine")
        es->kind = BasisKind::AnalyticCosine;
    else if (kind == "numerical-kernel")
        es->kind = BasisKind::NumericalKernel;
    else
        throw ConfigError("eigensystem: unknown kind " + kind);
    es->K = j.at("K").get<int>();
    const auto av = j.at("a").get<std::vector<double>>();
    const auto lv = j.at("lam").get<std::vector<double>>();
    if (static_cast<int>(av.size()) != es->K || static_cast<int>(lv.size()) != es->K)
        throw ConfigError("eigensystem: a/lam length mismatch");
    es->a = Eigen::Map<const Eigen::VectorXd>(av.data(), es->K);
    es->lam = Eigen::Map<const Eigen::VectorXd>(lv.data(), es->K);
    const auto& jg = j.at("grid");
    es->grid.dims = jg.at("dims").get<int>();
    const auto res = jg.at("res").get<std::vector<int>>();
    const auto bounds = jg.at("bounds").get<std::vector<std::vector<double>>>();
    for (int d = 0; d < es->grid.dims; ++d) {
        es->grid.res[d] = res.at(d);
        es->grid.bounds[d] = {bounds.at(d).at(0), bounds.at(d).at(1)};
    }
    if (es->grid.dims == 1) es->grid.res[1] = 1;
    es->grid.validate();
    const auto flat = base64_decode_f64(j.at("basis").get<std::string>());
    if (flat.size() != static_cast<size_t>(es->K) * es->grid.num_points())
        throw ConfigError("eigensystem: basis payload size mismatch");
    es->basis = Eigen::Map<const MatrixRM>(flat.data(), es->K, es->grid.num_points());
    if (j.contains("extra")) {
        if (es->kind == BasisKind::AnalyticCosine)
            es->modes_per_dim = j["extra"].value("modes_per_dim", 0);
        else
            es->gamma = j["extra"].value("gamma", 0.0);
    }
    return es;
}

}  // namespace fsb
