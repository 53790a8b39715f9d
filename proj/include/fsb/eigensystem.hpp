#pragma once

// Eigen-system of the drift operator A and covariance operator Q over a grid:
// decay rates a_k (A phi_k = -a_k phi_k), covariance eigenvalues lam_k
// (Q phi_k = lam_k phi_k), and the basis evaluation matrix that carries
// functions between grid values and spectral coefficients.
//
// Two constructions:
//   - analytic-cosine (2d): separable Neumann cosine modes, Q = I in the
//     transform domain, decay = Laplacian eigenvalue clamped from below
//   - numerical-kernel (1d): eigendecomposition of the quadrature-scaled
//     RBF Gram matrix, a_k = 1/2
// Both feed identical downstream per-coordinate bridge formulas.

#include <Eigen/Core>
#include <map>
#include <memory>
#include <mutex>

#include "fsb/grid.hpp"

#include <nlohmann/json_fwd.hpp>

namespace fsb {

using MatrixRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class BasisKind { AnalyticCosine, NumericalKernel };

class EigenSystem {
  public:
    BasisKind kind;
    int K = 0;
    Eigen::VectorXd a;    // decay rates, all > 0
    Eigen::VectorXd lam;  // covariance eigenvalues, non-increasing, summable
    MatrixRM basis;       // K x N, rows orthonormal under grid quadrature
    GridSpec grid;        // construction grid
    int modes_per_dim = 0;  // analytic-cosine only
    double gamma = 0.0;     // numerical-kernel only (RBF length-scale^2)

    // Basis rows evaluated at another grid's points. Analytic for cosine
    // systems; kernel systems require target == grid unless nystrom is set.
    // Results are memoized; the cache keeps the object logically immutable.
    const MatrixRM& eval_matrix(const GridSpec& target, bool nystrom = false) const;

    EigenSystem() = default;
    EigenSystem(const EigenSystem&) = delete;
    EigenSystem& operator=(const EigenSystem&) = delete;

  private:
    mutable std::mutex cache_mutex_;
    mutable std::map<std::string, std::unique_ptr<MatrixRM>> eval_cache_;
};

using EigenSystemPtr = std::shared_ptr<const EigenSystem>;

// Separable cosine modes at cell centers, orthonormal under rectangle-rule
// quadrature; 2d rows ordered n*modes_per_dim + m.
MatrixRM cosine_mode_matrix(const GridSpec& g, int modes_per_dim);

double rbf_kernel(double d2, double gamma);  // exp(-d2 / gamma)

EigenSystemPtr build_cosine_basis_2d(const GridSpec& grid, int modes_per_dim,
                                     double decay_floor = 1e-3);
EigenSystemPtr build_kernel_basis_1d(const GridSpec& grid, double gamma,
                                     double jitter = -1.0);  // <0: 1e-8*tr/N default

struct SpectralField {
    EigenSystemPtr eigs;
    Eigen::VectorXd coeffs;  // length K
};

SpectralField to_spectral(const GridField& f, EigenSystemPtr eigs);
GridField from_spectral(const SpectralField& c, const GridSpec& target, bool nystrom = false);

enum class ResampleMethod { Bilinear, Spectral };
GridField resample_initial(const GridField& f, const GridSpec& target, ResampleMethod method);

nlohmann::ordered_json eigensystem_to_json(const EigenSystem& es);
EigenSystemPtr eigensystem_from_json(const nlohmann::json& j);

}  // namespace fsb
