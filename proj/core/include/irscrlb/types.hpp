#pragma once

#include <complex>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace irscrlb {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

using Rng = std::mt19937_64;

inline constexpr double kPi = 3.14159265358979323846;

/// Builds an independent generator for a sub-stream of a master seed, e.g.
/// derive_rng(seed, {draw, trial}). Identical inputs give identical streams.
Rng derive_rng(std::uint64_t master_seed, std::initializer_list<std::uint64_t> stream);

/// Circularly symmetric complex Gaussian sample with unit variance.
Complex standard_complex_normal(Rng& rng);

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);
double db_to_linear(double db);

}  // namespace irscrlb
