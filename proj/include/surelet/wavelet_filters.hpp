#pragma once

#include <span>
#include <string>
#include <vector>

namespace surelet {

/// Orthonormal reconstruction lowpass filters, normalized to sum sqrt(2).
/// Known names: haar, db2, db4, sym4, sym8.
std::span<const double> lowpass_filter(const std::string& name);

/// Quadrature-mirror highpass: g1[n] = (-1)^n g0[L-1-n].
std::vector<double> highpass_from_lowpass(std::span<const double> lowpass);

std::vector<std::string> known_filters();

}  // namespace surelet
