#include "levreg/generate.hpp"

#include <Eigen/QR>
#include <cmath>
#include <tuple>
#include <vector>

#include "levreg/errors.hpp"
#include "levreg/oracle.hpp"
#include "levreg/random.hpp"

namespace levreg {

InstanceKind parse_instance_kind(const std::string& s) {
  if (s == "gaussian") return InstanceKind::gaussian;
  if (s == "ill-conditioned") return InstanceKind::ill_conditioned;
  if (s == "coherent-rows") return InstanceKind::coherent_rows;
  throw ConfigurationError("unknown instance kind '" + s + "'");
}

namespace {

Dense gaussian_dense(Index n, Index d, Rng& rng) {
  std::normal_distribution<double> normal;
  Dense a(n, d);
  for (Index j = 0; j < d; ++j)
    for (Index i = 0; i < n; ++i) a(i, j) = normal(rng);
  return a;
}

Dense orthonormal(Index n, Index d, Rng& rng) {
  Eigen::HouseholderQR<Dense> qr(gaussian_dense(n, d, rng));
  return qr.householderQ() * Dense::Identity(n, d);
}

SparseMatrix gaussian_sparse(Index n, Index d, double density, Rng& rng) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<Index> col(0, d - 1);
  std::vector<std::tuple<Index, Index, double>> entries;
  for (Index i = 0; i < n; ++i) {
    bool any = false;
    for (Index j = 0; j < d; ++j) {
      if (density >= 1.0 || unit(rng) < density) {
        entries.emplace_back(i, j, normal(rng));
        any = true;
      }
    }
    if (!any) entries.emplace_back(i, col(rng), normal(rng));
  }
  return SparseMatrix::from_triplets(n, d, std::move(entries));
}

}  // namespace

Instance generate(InstanceKind kind, Index n, Index d, double kappa_target, std::uint64_t seed,
                  const GenerateOptions& options) {
  if (n < d || d < 1) throw ConfigurationError("generate needs n >= d >= 1");
  if (!(options.density > 0.0 && options.density <= 1.0)) throw ConfigurationError("density must be in (0,1]");
  Rng rng = derive_rng(seed, 7);
  Instance out;
  switch (kind) {
    case InstanceKind::gaussian: {
      if (options.orthonormalize) {
        out.a = SparseMatrix::from_dense(orthonormal(n, d, rng));
      } else {
        out.a = gaussian_sparse(n, d, options.density, rng);
      }
      break;
    }
    case InstanceKind::ill_conditioned: {
      if (!(kappa_target >= 1.0)) throw ConfigurationError("kappa_target must be >= 1");
      const Dense u = orthonormal(n, d, rng);
      const Dense v = orthonormal(d, d, rng);
      Vector s(d);
      for (Index j = 0; j < d; ++j) {
        const double t = d > 1 ? static_cast<double>(j) / static_cast<double>(d - 1) : 0.0;
        s[j] = std::sqrt(static_cast<double>(n)) * std::pow(kappa_target, -0.5 * t);
      }
      out.a = SparseMatrix::from_dense(u * s.asDiagonal() * v.transpose());
      break;
    }
    case InstanceKind::coherent_rows: {
      const SparseMatrix bulk = gaussian_sparse(n - d, d, options.density, rng);
      const double top = power_iteration(bulk, 200, 1e-6, seed);
      const double c = std::sqrt(200.0 * std::max(top, 1.0));
      std::vector<Index> ptr{0}, idx;
      std::vector<double> val;
      for (Index j = 0; j < d; ++j) {
        idx.push_back(j);
        val.push_back(c);
        ptr.push_back(static_cast<Index>(idx.size()));
      }
      for (Index i = 0; i < bulk.rows(); ++i) {
        const RowView r = bulk.row(i);
        idx.insert(idx.end(), r.cols.begin(), r.cols.end());
        val.insert(val.end(), r.vals.begin(), r.vals.end());
        ptr.push_back(static_cast<Index>(idx.size()));
      }
      out.a = SparseMatrix(n, d, std::move(ptr), std::move(idx), std::move(val));
      break;
    }
  }
  std::normal_distribution<double> normal;
  out.b.resize(n);
  for (Index i = 0; i < n; ++i) out.b[i] = normal(rng);
  return out;
}

}  // namespace levreg
