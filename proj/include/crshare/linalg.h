#pragma once

#include <optional>

#include "crshare/config.h"

namespace crshare {

// Lower-triangular-up-to-permutation factor F with F * F^T = m, tolerant of
// singular positive semi-definite input (e.g. an all-ones correlation).
// Returns nullopt when m is not symmetric PSD within `tolerance`.
std::optional<Matrix> psd_factor(const Matrix& m, double tolerance = 1e-10);

bool is_symmetric(const Matrix& m, double tolerance = 1e-12);

}  // namespace crshare
