#include "oscmfg/linearized.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>

#include "oscmfg/error.hpp"
#include "oscmfg/quadrature.hpp"
#include "oscmfg/spectral.hpp"

namespace oscmfg {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

struct LinearizedEvolver::Mode {
  int k = 1;
  Eigen::VectorXcd lambda;  // kept eigenvalues
  CMatrix Vh;               // h-rows of the kept eigenvectors
  CMatrix Vp;               // p-rows of the kept eigenvectors
  Eigen::MatrixXcd p_pinv;  // minimum-norm solver pieces, see coefficients()
  Eigen::MatrixXcd null;    // null space of Vp
  Eigen::MatrixXcd h_null_solve;

  CVector coefficients(const CVector& q, const Eigen::VectorXd& sqrt_w) const {
    CVector c0 = p_pinv * q;
    if (null.cols() == 0) return c0;
    // among all c with Vp c = q, minimise the weighted norm of h(0) = Vh c
    CVector rhs = -(sqrt_w.asDiagonal() * (Vh * c0));
    CVector y = h_null_solve * rhs;
    return c0 + null * y;
  }
};

LinearizedEvolver::~LinearizedEvolver() = default;
LinearizedEvolver::LinearizedEvolver(LinearizedEvolver&&) noexcept = default;
LinearizedEvolver& LinearizedEvolver::operator=(LinearizedEvolver&&) noexcept = default;

LinearizedEvolver::LinearizedEvolver(double R, const ModelParams& params, const CostSpec& cost,
                                     LinearizedOptions options)
    : options_(options) {
  if (!(R > 0.0)) throw DomainError("invalid_params", "R must be positive");
  if (options_.K_max == 0 || options_.n_omega == 0) throw DomainError("invalid_params", "empty discretization");
  if (params.gamma == 0.0) {
    omega_ = {1.0};
    weight_ = {1.0};
  } else {
    QuadratureRule rule = gauss_legendre(options_.n_omega, 1.0 - params.gamma, 1.0 + params.gamma);
    omega_ = rule.nodes;
    weight_ = rule.weights;
    for (double& w : weight_) w /= 2.0 * params.gamma;
  }
  const Eigen::Index M = static_cast<Eigen::Index>(omega_.size());
  const double s2 = params.sigma_sq();
  const std::complex<double> I(0.0, 1.0);

  for (std::size_t kk = 1; kk <= options_.K_max; ++kk) {
    const double k = static_cast<double>(kk);
    const double a = 0.5 * s2 * k * k;
    const double c = cost.coefficient(kk);
    CMatrix L = CMatrix::Zero(2 * M, 2 * M);
    for (Eigen::Index j = 0; j < M; ++j) {
      const double om = omega_[static_cast<std::size_t>(j)];
      L(j, j) = -I * k * om + a;
      for (Eigen::Index l = 0; l < M; ++l) L(j, M + l) = -kPi * c * weight_[static_cast<std::size_t>(l)];
      L(M + j, M + j) = -I * k * om - a;
      L(M + j, j) = -k * k / (2.0 * kPi * R);
    }
    Eigen::ComplexEigenSolver<CMatrix> es(L);
    if (es.info() != Eigen::Success) throw DomainError("eigensolver", "eigendecomposition failed");
    const auto& ev = es.eigenvalues();
    const double tol = 1e-8 * std::max(1.0, ev.cwiseAbs().maxCoeff());
    std::vector<Eigen::Index> keep;
    for (Eigen::Index m = 0; m < ev.size(); ++m)
      if (ev[m].real() <= tol) keep.push_back(m);

    Mode mode;
    mode.k = static_cast<int>(kk);
    const Eigen::Index nk = static_cast<Eigen::Index>(keep.size());
    mode.lambda.resize(nk);
    mode.Vh.resize(M, nk);
    mode.Vp.resize(M, nk);
    for (Eigen::Index m = 0; m < nk; ++m) {
      mode.lambda[m] = ev[keep[static_cast<std::size_t>(m)]];
      auto v = es.eigenvectors().col(keep[static_cast<std::size_t>(m)]);
      mode.Vh.col(m) = v.head(M);
      mode.Vp.col(m) = v.tail(M);
    }
    Eigen::JacobiSVD<CMatrix> svd(mode.Vp, Eigen::ComputeFullU | Eigen::ComputeFullV);
    svd.setThreshold(1e-10);
    const Eigen::Index rank = svd.rank();
    // pseudo-inverse for the minimum-norm particular solution
    CMatrix Sinv = CMatrix::Zero(nk, M);
    for (Eigen::Index r = 0; r < rank; ++r) Sinv(r, r) = 1.0 / svd.singularValues()[r];
    mode.p_pinv = svd.matrixV() * Sinv * svd.matrixU().adjoint();
    mode.null = svd.matrixV().rightCols(nk - rank);
    if (mode.null.cols() > 0) {
      Eigen::VectorXd sqrt_w(M);
      for (Eigen::Index j = 0; j < M; ++j) sqrt_w[j] = std::sqrt(weight_[static_cast<std::size_t>(j)]);
      CMatrix B = sqrt_w.asDiagonal() * (mode.Vh * mode.null);
      mode.h_null_solve = B.completeOrthogonalDecomposition().pseudoInverse();
    }
    modes_.push_back(std::move(mode));
  }
}

double LinearizedEvolver::max_kept_real_part() const {
  double m = -INFINITY;
  for (const auto& mode : modes_)
    if (mode.lambda.size() > 0) m = std::max(m, mode.lambda.real().maxCoeff());
  return m;
}

NormHistory LinearizedEvolver::evolve(const std::vector<std::vector<double>>& q, double T,
                                      std::size_t n_samples) const {
  const std::size_t M = omega_.size();
  if (q.size() != M) throw DomainError("invalid_params", "perturbation must have one row per omega node");
  if (!(T >= 0.0) || n_samples == 0) throw DomainError("invalid_params", "need T >= 0 and at least one sample");
  const std::size_t n_theta = q.front().size();
  if (n_theta < 2 * options_.K_max + 1) throw DomainError("invalid_params", "theta grid too coarse for K_max");
  double qmax = 0.0;
  for (const auto& row : q) {
    if (row.size() != n_theta) throw DomainError("invalid_params", "ragged perturbation grid");
    for (double v : row) qmax = std::max(qmax, std::abs(v));
  }
  for (const auto& row : q) {
    double mean = 0.0;
    for (double v : row) mean += v;
    mean /= static_cast<double>(n_theta);
    if (std::abs(mean) > 1e-12 * std::max(1.0, qmax))
      throw DomainError("nonzero_mean", "initial perturbation must have zero theta-mean for every omega");
  }

  Eigen::VectorXd sqrt_w(static_cast<Eigen::Index>(M));
  for (std::size_t j = 0; j < M; ++j) sqrt_w[static_cast<Eigen::Index>(j)] = std::sqrt(weight_[j]);

  std::vector<CVector> coeffs;
  for (const auto& mode : modes_) {
    CVector qk(static_cast<Eigen::Index>(M));
    for (std::size_t j = 0; j < M; ++j) {
      std::complex<double> s = 0.0;
      for (std::size_t m = 0; m < n_theta; ++m) {
        double th = kTwoPi * static_cast<double>(m) / static_cast<double>(n_theta);
        s += q[j][m] * std::polar(1.0, -mode.k * th);
      }
      qk[static_cast<Eigen::Index>(j)] = s / static_cast<double>(n_theta);
    }
    coeffs.push_back(mode.coefficients(qk, sqrt_w));
  }

  NormHistory out;
  for (std::size_t s = 0; s <= n_samples; ++s) {
    const double t = T * static_cast<double>(s) / static_cast<double>(n_samples);
    double sq = 0.0;
    for (std::size_t mi = 0; mi < modes_.size(); ++mi) {
      const auto& mode = modes_[mi];
      CVector e = (mode.lambda * t).array().exp() * coeffs[mi].array();
      CVector p = mode.Vp * e;
      for (std::size_t j = 0; j < M; ++j) sq += weight_[j] * std::norm(p[static_cast<Eigen::Index>(j)]);
    }
    // modes +k and -k contribute equally; theta-integral gives 2 pi
    out.t.push_back(t);
    out.norm.push_back(std::sqrt(2.0 * kTwoPi * sq));
  }
  return out;
}

std::vector<std::vector<double>> first_harmonic_perturbation(const LinearizedEvolver& evolver, std::size_t n_theta,
                                                             double amplitude) {
  std::vector<double> row(n_theta);
  for (std::size_t m = 0; m < n_theta; ++m)
    row[m] = amplitude * std::cos(kTwoPi * static_cast<double>(m) / static_cast<double>(n_theta));
  return std::vector<std::vector<double>>(evolver.omega_nodes().size(), row);
}

NormHistory linearized_ivp_evolve(const std::vector<std::vector<double>>& q, double R, const ModelParams& params,
                                  double T, std::size_t n_samples, const CostSpec& cost, LinearizedOptions options) {
  return LinearizedEvolver(R, params, cost, options).evolve(q, T, n_samples);
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::IncoherenceStable: return "incoherence-stable";
    case Verdict::Marginal: return "marginal";
    case Verdict::Synchrony: return "synchrony";
  }
  return "unknown";
}

namespace {

std::optional<std::complex<double>> locate_root(double R, const ModelParams& params, const CostSpec& cost) {
  std::vector<double> grid;
  try {
    grid = default_R_grid(1, params, cost);
  } catch (const DomainError&) {
    return std::nullopt;
  }
  if (R >= grid.front()) return solve_characteristic(branch_seed(1, params, Branch::Right), R, 1, params, cost);
  std::vector<double> path_grid;
  for (double r : grid)
    if (r > R) path_grid.push_back(r);
  path_grid.push_back(R);
  try {
    return discrete_eigenpath(1, path_grid, params, cost, Branch::Right).samples.back().lambda;
  } catch (const PathLostError&) {
    return std::nullopt;
  }
}

}  // namespace

StabilityReport assess_stability(double R, const ModelParams& params, double T, const CostSpec& cost) {
  StabilityReport rep;
  rep.R = R;
  rep.gamma = params.gamma;
  rep.sigma = params.sigma;
  rep.R_c = cost.coefficient(1) == 0.0 ? 0.0 : critical_R_numeric(params.gamma, params.sigma, 1, cost);
  if (std::abs(R - rep.R_c) <= 1e-3 * rep.R_c)
    rep.verdict = Verdict::Marginal;
  else
    rep.verdict = R > rep.R_c ? Verdict::IncoherenceStable : Verdict::Synchrony;
  if (cost.coefficient(1) != 0.0)
    if (auto z = locate_root(R, params, cost)) rep.max_real_part = std::abs(z->real());
  LinearizedEvolver ev(R, params, cost);
  rep.history = ev.evolve(first_harmonic_perturbation(ev), T, 400);
  return rep;
}

}  // namespace oscmfg
