#include "lmcf/field.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace lmcf {

ScalarField::ScalarField(GridSpec spec, std::vector<double> values)
    : spec_(std::move(spec)), values_(std::move(values)) {
  if (values_.size() != spec_.point_count()) {
    throw InvalidArgumentError("field value count does not match the grid");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw InvalidArgumentError("field contains a non-finite value");
  }
}

ScalarField ScalarField::constant(const GridSpec& spec, double c) {
  return {spec, std::vector<double>(spec.point_count(), c)};
}

ScalarField ScalarField::from_function(
    const GridSpec& spec,
    const std::function<double(const std::array<double, kMaxDim>&)>& f) {
  std::vector<double> v(spec.point_count());
  for (std::size_t p = 0; p < v.size(); ++p) {
    const auto idx = spec.unflatten(p);
    std::array<double, kMaxDim> x{};
    for (int a = 0; a < spec.dim(); ++a) x[a] = idx[a] * spec.spacing(a);
    v[p] = f(x);
  }
  return {spec, std::move(v)};
}

double ScalarField::mean() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s / static_cast<double>(values_.size());
}

namespace {

template <typename Op>
ScalarField zip(const ScalarField& a, const ScalarField& b, Op op) {
  require_same_grid(a.spec(), b.spec());
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = op(a[i], b[i]);
  return {a.spec(), std::move(out)};
}

}  // namespace

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  return zip(a, b, [](double x, double y) { return x + y; });
}
ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  return zip(a, b, [](double x, double y) { return x - y; });
}
ScalarField operator*(const ScalarField& a, const ScalarField& b) {
  return zip(a, b, [](double x, double y) { return x * y; });
}
ScalarField operator*(double s, const ScalarField& a) {
  return map(a, [s](double x) { return s * x; });
}

ScalarField map(const ScalarField& a, const std::function<double(double)>& f) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(a[i]);
  return {a.spec(), std::move(out)};
}

// ---------------------------------------------------------------------------

const SymIndexTable& SymIndexTable::get(int dim, int rank) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, SymIndexTable> cache;
  std::lock_guard lock(mu);
  auto it = cache.find({dim, rank});
  if (it != cache.end()) return it->second;

  SymIndexTable t;
  t.dim = dim;
  t.rank = rank;
  std::array<int, 4> idx{};
  // Enumerate non-decreasing tuples in lexicographic order.
  auto recurse = [&](auto&& self, int pos, int lo) -> void {
    if (pos == rank) {
      t.indices.push_back(idx);
      int mult = 1;
      for (int k = 2; k <= rank; ++k) mult *= k;
      int run = 1;
      for (int k = 1; k <= rank; ++k) {
        if (k < rank && idx[k] == idx[k - 1]) {
          ++run;
        } else {
          for (int r = 2; r <= run; ++r) mult /= r;
          run = 1;
        }
      }
      t.multiplicity.push_back(mult);
      return;
    }
    for (int i = lo; i < dim; ++i) {
      idx[pos] = i;
      self(self, pos + 1, i);
    }
  };
  recurse(recurse, 0, 0);
  return cache.emplace(std::make_pair(dim, rank), std::move(t)).first->second;
}

int SymIndexTable::lookup(std::array<int, 4> tuple) const {
  std::sort(tuple.begin(), tuple.begin() + rank);
  for (int k = rank; k < 4; ++k) tuple[k] = 0;
  for (std::size_t c = 0; c < indices.size(); ++c) {
    if (indices[c] == tuple) return static_cast<int>(c);
  }
  throw InvalidArgumentError("tensor index out of range");
}

std::array<int, kMaxDim> SymIndexTable::axis_orders(int component) const {
  std::array<int, kMaxDim> orders{};
  for (int k = 0; k < rank; ++k) ++orders[indices[component][k]];
  return orders;
}

// ---------------------------------------------------------------------------

template <int Rank>
SymTensorField<Rank>::SymTensorField(GridSpec spec, std::vector<std::vector<double>> components)
    : spec_(std::move(spec)), components_(std::move(components)) {
  const auto& t = table();
  if (components_.size() != t.indices.size()) {
    throw InvalidArgumentError("tensor field has the wrong number of components");
  }
  for (const auto& c : components_) {
    if (c.size() != spec_.point_count()) {
      throw InvalidArgumentError("tensor component size does not match the grid");
    }
    for (double v : c) {
      if (!std::isfinite(v)) throw InvalidArgumentError("tensor field contains a non-finite value");
    }
  }
}

template <int Rank>
SymTensorField<Rank> SymTensorField<Rank>::zeros(const GridSpec& spec) {
  const auto& t = SymIndexTable::get(spec.dim(), Rank);
  return {spec, std::vector<std::vector<double>>(
                    t.indices.size(), std::vector<double>(spec.point_count(), 0.0))};
}

template <int Rank>
double SymTensorField<Rank>::norm2_at(std::size_t point) const {
  const auto& t = table();
  double s = 0.0;
  for (std::size_t c = 0; c < components_.size(); ++c) {
    const double v = components_[c][point];
    s += t.multiplicity[c] * v * v;
  }
  return s;
}

template <int Rank>
ScalarField SymTensorField<Rank>::norm2() const {
  std::vector<double> out(spec_.point_count());
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = norm2_at(p);
  return {spec_, std::move(out)};
}

template <int Rank>
ScalarField SymTensorField<Rank>::norm() const {
  std::vector<double> out(spec_.point_count());
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = std::sqrt(norm2_at(p));
  return {spec_, std::move(out)};
}

template class SymTensorField<1>;
template class SymTensorField<2>;
template class SymTensorField<3>;
template class SymTensorField<4>;

SymMat SymMat::zero(int n) {
  SymMat m;
  m.n = n;
  return m;
}

SymMat SymMat::identity(int n) {
  SymMat m = zero(n);
  for (int i = 0; i < n; ++i) m.a[i][i] = 1.0;
  return m;
}

SymMat matrix_at(const SymMatrixField& m, std::size_t point) {
  const int n = m.spec().dim();
  const auto& t = m.table();
  SymMat out = SymMat::zero(n);
  for (int c = 0; c < m.component_count(); ++c) {
    const int i = t.indices[c][0];
    const int j = t.indices[c][1];
    out.a[i][j] = out.a[j][i] = m.component(c)[point];
  }
  return out;
}

}  // namespace lmcf
