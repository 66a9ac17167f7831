#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "colp/rng.hpp"
#include "colp/types.hpp"

namespace colp {

enum class CovFamily { Identity, Compound, Ar1, Example32, Example33, Factor5, Explicit };

struct CovarianceSpec {
  CovFamily family = CovFamily::Identity;
  Index p = 0;
  double rho = 0.0;           // compound / ar1 only
  Matrix explicit_sigma;      // Explicit only

  static CovarianceSpec identity(Index p) { return {CovFamily::Identity, p, 0.0, {}}; }
  static CovarianceSpec compound(Index p, double rho) { return {CovFamily::Compound, p, rho, {}}; }
  static CovarianceSpec ar1(Index p, double rho) { return {CovFamily::Ar1, p, rho, {}}; }
  static CovarianceSpec example32(Index p) { return {CovFamily::Example32, p, 0.0, {}}; }
  static CovarianceSpec example33(Index p) { return {CovFamily::Example33, p, 0.0, {}}; }
  static CovarianceSpec factor5(Index p) { return {CovFamily::Factor5, p, 0.0, {}}; }
  static CovarianceSpec explicit_matrix(Matrix sigma);
};

// Single entry sigma_{ij} of the implied covariance (0-based indices).
double covariance_entry(const CovarianceSpec& spec, Index i, Index j);

enum class CoefKind { Fixed, Ex41Random };

struct CoefficientSpec {
  CoefKind kind = CoefKind::Fixed;
  Index p = 0;
  std::vector<std::pair<Index, double>> nonzeros;  // Fixed only

  static CoefficientSpec fixed(Index p, std::vector<std::pair<Index, double>> nz) {
    return {CoefKind::Fixed, p, std::move(nz)};
  }
  static CoefficientSpec ex41_random(Index p) { return {CoefKind::Ex41Random, p, {}}; }
};

enum class ErrorFamily { Normal, Exponential };
enum class PredictorFamily { Gaussian, Exponential };

struct ScenarioSpec {
  Index n = 0;
  Index p = 0;
  CovarianceSpec covariance;
  CoefficientSpec coefficients;
  double r2 = 0.6;
  ErrorFamily error_family = ErrorFamily::Normal;
  PredictorFamily predictor_family = PredictorFamily::Gaussian;
  Index replications = 100;
  std::uint64_t master_seed = 0;
};

// Built-in benchmark designs: "3.1", "3.2", "3.3", "4.1", "4.2", "4.3", "4.4".
ScenarioSpec example_scenario(const std::string& name, Index n, Index p, double r2,
                              Index replications, std::uint64_t master_seed);

Matrix build_covariance(const CovarianceSpec& spec);

Matrix sample_predictors(const CovarianceSpec& spec, PredictorFamily family, Index n,
                         RngStream& rng);

Vector realize_coefficients(const CoefficientSpec& spec, Index n, RngStream& rng);

// sigma^2 = (beta^T Sigma beta) (1 - r2) / r2, using the implied Sigma of
// the spec (identity for exponential predictors).
double calibrate_noise(const Vector& beta, const CovarianceSpec& spec, double r2);

Dataset generate_dataset(const ScenarioSpec& scn, Index replicate_index);

// cov_L(x_j, y | x_k) = sum_i (sigma_ij - sigma_kj sigma_kk^{-1} sigma_ki) beta_i
double conditional_linear_covariance(const Matrix& sigma, const Vector& beta, Index j, Index k);

// CSV export: header "y,x1,...,xp", 17 significant digits.
void write_dataset_csv(const Dataset& ds, const std::string& path);
Dataset read_dataset_csv(const std::string& path);

}  // namespace colp
