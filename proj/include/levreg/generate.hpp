#pragma once

#include <cstdint>
#include <string>

#include "levreg/sparse_matrix.hpp"

namespace levreg {

enum class InstanceKind { gaussian, ill_conditioned, coherent_rows };

InstanceKind parse_instance_kind(const std::string& s);

struct GenerateOptions {
  /// Fraction of entries kept in Gaussian rows; at least one per row survives.
  double density = 1.0;
  /// Gaussian kind only: replace A by an orthonormal basis of its range (kappa = 1).
  bool orthonormalize = false;
};

struct Instance {
  SparseMatrix a;
  Vector b;
};

/// gaussian: i.i.d. N(0,1) entries.
/// ill_conditioned: U diag(s) V^T with A^T A condition number kappa_target.
/// coherent_rows: Gaussian bulk plus d scaled coordinate rows of leverage >= 0.99.
Instance generate(InstanceKind kind, Index n, Index d, double kappa_target, std::uint64_t seed,
                  const GenerateOptions& options = {});

}  // namespace levreg
