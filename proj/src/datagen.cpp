#include "colp/datagen.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace colp {

namespace {

void validate(const CovarianceSpec& spec) {
  if (spec.p < 1) throw DimensionMismatch("covariance: p must be positive");
  switch (spec.family) {
    case CovFamily::Compound:
      if (spec.rho >= 1.0 || spec.rho <= -1.0 / static_cast<double>(spec.p - 1)) {
        throw NotPositiveDefinite("compound: rho outside (-1/(p-1), 1)");
      }
      break;
    case CovFamily::Ar1:
      if (std::abs(spec.rho) >= 1.0) throw NotPositiveDefinite("ar1: |rho| must be < 1");
      break;
    default:
      break;
  }
}

}  // namespace

CovarianceSpec CovarianceSpec::explicit_matrix(Matrix sigma) {
  if (sigma.rows() != sigma.cols()) throw DimensionMismatch("explicit covariance must be square");
  if (!sigma.isApprox(sigma.transpose(), 1e-12)) {
    throw NotPositiveDefinite("explicit covariance must be symmetric");
  }
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("explicit covariance failed Cholesky");
  }
  CovarianceSpec spec;
  spec.family = CovFamily::Explicit;
  spec.p = sigma.rows();
  spec.explicit_sigma = std::move(sigma);
  return spec;
}

double covariance_entry(const CovarianceSpec& spec, Index i, Index j) {
  switch (spec.family) {
    case CovFamily::Identity:
      return i == j ? 1.0 : 0.0;
    case CovFamily::Compound:
      return i == j ? 1.0 : spec.rho;
    case CovFamily::Ar1:
      return std::pow(spec.rho, std::abs(static_cast<double>(i - j)));
    case CovFamily::Example32:
      if (i == j) return 1.0;
      return (i == 0 || j == 0) ? 0.5 : 0.75;
    case CovFamily::Example33:
      if (i == j) return 1.0;
      if (i <= 1 || j <= 1) return 0.0;
      return 0.5;
    case CovFamily::Factor5:
      // x_j = (z_j + w_j)/sqrt(2) for j < 5, x_j = (z_j + sum_{i<5} w_i)/2 else
      if (i == j) return i < 5 ? 1.0 : 1.5;
      if (i < 5 && j < 5) return 0.0;
      if (i >= 5 && j >= 5) return 1.25;
      return 1.0 / (2.0 * std::sqrt(2.0));
    case CovFamily::Explicit:
      return spec.explicit_sigma(i, j);
  }
  return 0.0;
}

Matrix build_covariance(const CovarianceSpec& spec) {
  validate(spec);
  Matrix sigma(spec.p, spec.p);
  for (Index i = 0; i < spec.p; ++i) {
    for (Index j = 0; j < spec.p; ++j) sigma(i, j) = covariance_entry(spec, i, j);
  }
  return sigma;
}

Matrix sample_predictors(const CovarianceSpec& spec, PredictorFamily family, Index n,
                         RngStream& rng) {
  validate(spec);
  const Index p = spec.p;
  Matrix x(n, p);

  if (family == PredictorFamily::Exponential) {
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < p; ++j) x(i, j) = rng.exponential(1.0) - 1.0;
    }
    return x;
  }

  switch (spec.family) {
    case CovFamily::Identity:
      for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < p; ++j) x(i, j) = rng.normal();
      }
      break;
    case CovFamily::Compound: {
      if (spec.rho >= 0.0) {
        // one-factor representation, exact in distribution
        const double a = std::sqrt(spec.rho);
        const double b = std::sqrt(1.0 - spec.rho);
        for (Index i = 0; i < n; ++i) {
          const double g = rng.normal();
          for (Index j = 0; j < p; ++j) x(i, j) = a * g + b * rng.normal();
        }
      } else {
        Eigen::LLT<Matrix> llt(build_covariance(spec));
        Matrix l = llt.matrixL();
        for (Index i = 0; i < n; ++i) {
          Vector z(p);
          for (Index j = 0; j < p; ++j) z(j) = rng.normal();
          x.row(i) = (l * z).transpose();
        }
      }
      break;
    }
    case CovFamily::Ar1: {
      const double s = std::sqrt(1.0 - spec.rho * spec.rho);
      for (Index i = 0; i < n; ++i) {
        x(i, 0) = rng.normal();
        for (Index j = 1; j < p; ++j) x(i, j) = spec.rho * x(i, j - 1) + s * rng.normal();
      }
      break;
    }
    case CovFamily::Example32: {
      // x_1 = a g + b z_1, x_j = sqrt(.75) g + .5 z_j; a c = .5, c^2 = .75
      const double c = std::sqrt(0.75);
      const double a = 0.5 / c;
      const double b = std::sqrt(1.0 - a * a);
      for (Index i = 0; i < n; ++i) {
        const double g = rng.normal();
        x(i, 0) = a * g + b * rng.normal();
        for (Index j = 1; j < p; ++j) x(i, j) = c * g + 0.5 * rng.normal();
      }
      break;
    }
    case CovFamily::Example33: {
      const double h = std::sqrt(0.5);
      for (Index i = 0; i < n; ++i) {
        const double g = rng.normal();
        x(i, 0) = rng.normal();
        x(i, 1) = rng.normal();
        for (Index j = 2; j < p; ++j) x(i, j) = h * (g + rng.normal());
      }
      break;
    }
    case CovFamily::Factor5: {
      const double h = std::sqrt(0.5);
      for (Index i = 0; i < n; ++i) {
        double w[5];
        double wsum = 0.0;
        for (double& wk : w) {
          wk = rng.normal();
          wsum += wk;
        }
        for (Index j = 0; j < p; ++j) {
          const double z = rng.normal();
          x(i, j) = j < 5 ? h * (z + w[j]) : 0.5 * (z + wsum);
        }
      }
      break;
    }
    case CovFamily::Explicit: {
      Eigen::LLT<Matrix> llt(spec.explicit_sigma);
      Matrix l = llt.matrixL();
      for (Index i = 0; i < n; ++i) {
        Vector z(p);
        for (Index j = 0; j < p; ++j) z(j) = rng.normal();
        x.row(i) = (l * z).transpose();
      }
      break;
    }
  }
  return x;
}

Vector realize_coefficients(const CoefficientSpec& spec, Index n, RngStream& rng) {
  Vector beta = Vector::Zero(spec.p);
  if (spec.kind == CoefKind::Fixed) {
    for (const auto& [j, v] : spec.nonzeros) {
      if (j < 0 || j >= spec.p) throw DimensionMismatch("coefficient index out of range");
      beta(j) = v;
    }
  } else {
    const double bump = 4.0 * std::log(static_cast<double>(n)) / static_cast<double>(n);
    const Index t = std::min<Index>(8, spec.p);
    for (Index j = 0; j < t; ++j) {
      const bool flip = rng.bernoulli(0.4);
      const double z = rng.normal();
      beta(j) = (flip ? -1.0 : 1.0) * (std::abs(z) + bump);
    }
  }
  return beta;
}

double calibrate_noise(const Vector& beta, const CovarianceSpec& spec, double r2) {
  if (r2 <= 0.0 || r2 >= 1.0) throw InvalidRule("calibrate_noise: need 0 < r2 < 1");
  std::vector<Index> support;
  for (Index j = 0; j < beta.size(); ++j) {
    if (beta(j) != 0.0) support.push_back(j);
  }
  double signal = 0.0;
  for (Index i : support) {
    for (Index j : support) signal += beta(i) * beta(j) * covariance_entry(spec, i, j);
  }
  if (signal <= 0.0) throw DegenerateSignal("calibrate_noise: beta^T Sigma beta is zero");
  return signal * (1.0 - r2) / r2;
}

Dataset generate_dataset(const ScenarioSpec& scn, Index replicate_index) {
  const auto rep = static_cast<std::uint64_t>(replicate_index);
  RngStream rng_x(scn.master_seed, rep, 0);
  RngStream rng_beta(scn.master_seed, rep, 1);
  RngStream rng_eps(scn.master_seed, rep, 2);

  Dataset ds;
  ds.x = sample_predictors(scn.covariance, scn.predictor_family, scn.n, rng_x);
  Vector beta = realize_coefficients(scn.coefficients, scn.n, rng_beta);

  // Exponential predictors are i.i.d.; the implied covariance is the identity.
  const CovarianceSpec effective_cov = scn.predictor_family == PredictorFamily::Exponential
                                           ? CovarianceSpec::identity(scn.p)
                                           : scn.covariance;
  const double sigma2 = calibrate_noise(beta, effective_cov, scn.r2);
  const double sigma = std::sqrt(sigma2);

  Vector eps(scn.n);
  if (scn.error_family == ErrorFamily::Normal) {
    for (Index i = 0; i < scn.n; ++i) eps(i) = sigma * rng_eps.normal();
  } else {
    const double lambda = 1.0 / sigma;  // var(exp(lambda)) = sigma^2
    for (Index i = 0; i < scn.n; ++i) eps(i) = rng_eps.exponential(lambda) - sigma;
  }

  ds.y = ds.x * beta + eps;
  Truth truth;
  truth.beta = std::move(beta);
  for (Index j = 0; j < scn.p; ++j) {
    if (truth.beta(j) != 0.0) truth.active.push_back(j);
  }
  ds.truth = std::move(truth);
  return ds;
}

double conditional_linear_covariance(const Matrix& sigma, const Vector& beta, Index j, Index k) {
  if (sigma.rows() != sigma.cols() || sigma.rows() != beta.size()) {
    throw DimensionMismatch("conditional_linear_covariance: shape mismatch");
  }
  const double skk = sigma(k, k);
  if (skk <= 0.0) throw NotPositiveDefinite("conditional_linear_covariance: sigma_kk <= 0");
  double out = 0.0;
  for (Index i = 0; i < beta.size(); ++i) {
    if (beta(i) == 0.0) continue;
    out += (sigma(i, j) - sigma(k, j) / skk * sigma(k, i)) * beta(i);
  }
  return out;
}

ScenarioSpec example_scenario(const std::string& name, Index n, Index p, double r2,
                              Index replications, std::uint64_t master_seed) {
  ScenarioSpec scn;
  scn.n = n;
  scn.p = p;
  scn.r2 = r2;
  scn.replications = replications;
  scn.master_seed = master_seed;
  if (name == "3.1") {
    scn.covariance = CovarianceSpec::identity(p);
    scn.coefficients = CoefficientSpec::fixed(p, {{0, 5}, {1, 1}, {2, 1}, {3, 1}});
  } else if (name == "3.2") {
    scn.covariance = CovarianceSpec::example32(p);
    scn.coefficients = CoefficientSpec::fixed(p, {{0, 5}, {1, 2}, {2, 2}, {3, 2}, {4, -4}});
  } else if (name == "3.3") {
    scn.covariance = CovarianceSpec::example33(p);
    scn.coefficients =
        CoefficientSpec::fixed(p, {{0, 5}, {1, 1}, {2, 2}, {3, 2}, {4, 2}, {5, -3}});
  } else if (name == "4.1") {
    scn.covariance = CovarianceSpec::identity(p);
    scn.coefficients = CoefficientSpec::ex41_random(p);
    scn.predictor_family = PredictorFamily::Exponential;
    scn.error_family = ErrorFamily::Exponential;
  } else if (name == "4.2") {
    scn.covariance = CovarianceSpec::compound(p, 0.5);
    scn.coefficients =
        CoefficientSpec::fixed(p, {{0, 3}, {1, 3}, {2, 3}, {3, 3}, {4, 3}, {5, -7.5}});
  } else if (name == "4.3") {
    scn.covariance = CovarianceSpec::ar1(p, 0.5);
    scn.coefficients =
        CoefficientSpec::fixed(p, {{0, 3}, {3, -2}, {6, 1.5}, {9, -4}, {12, 2}});
  } else if (name == "4.4") {
    scn.covariance = CovarianceSpec::factor5(p);
    scn.coefficients = CoefficientSpec::fixed(p, {{0, 2}, {1, 4}, {2, 6}, {3, 8}, {4, 10}});
  } else {
    throw InvalidRule("unknown example scenario: " + name);
  }
  return scn;
}

void write_dataset_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << "y";
  for (Index j = 0; j < ds.p(); ++j) out << ",x" << (j + 1);
  out << "\n";
  char buf[40];
  for (Index i = 0; i < ds.n(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", ds.y(i));
    out << buf;
    for (Index j = 0; j < ds.p(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", ds.x(i, j));
      out << ',' << buf;
    }
    out << "\n";
  }
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error("empty dataset file: " + path);
  Index p = 0;
  for (char ch : line) {
    if (ch == ',') ++p;
  }
  if (p < 1) throw Error("dataset needs at least one predictor column: " + path);
  std::vector<double> values;
  Index n = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    Index cols = 0;
    while (std::getline(ss, cell, ',')) {
      values.push_back(std::stod(cell));
      ++cols;
    }
    if (cols != p + 1) throw Error("ragged row in " + path);
    ++n;
  }
  Dataset ds;
  ds.y.resize(n);
  ds.x.resize(n, p);
  for (Index i = 0; i < n; ++i) {
    ds.y(i) = values[static_cast<std::size_t>(i) * (p + 1)];
    for (Index j = 0; j < p; ++j) {
      ds.x(i, j) = values[static_cast<std::size_t>(i) * (p + 1) + 1 + j];
    }
  }
  return ds;
}

}  // namespace colp
