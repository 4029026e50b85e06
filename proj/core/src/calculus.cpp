#include "lmcf/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "spectral.hpp"

namespace lmcf {

std::string_view to_string(Scheme s) {
  return s == Scheme::spectral ? "spectral" : "central4";
}

Scheme parse_scheme(std::string_view text) {
  if (text == "spectral") return Scheme::spectral;
  if (text == "central4") return Scheme::central4;
  throw InvalidArgumentError("unknown differentiation scheme '" + std::string(text) + "'");
}

namespace {

// Fourth-order centered stencils with periodic wrap along one axis.
enum class Stencil { first, second };

std::vector<double> apply_stencil(const GridSpec& spec, const std::vector<double>& in, int axis,
                                  Stencil st) {
  const int n = spec.size(axis);
  const std::size_t stride = spec.stride(axis);
  const std::size_t block = stride * static_cast<std::size_t>(n);
  const double h = spec.spacing(axis);
  std::vector<double> out(in.size());
  for (std::size_t base = 0; base < in.size(); base += block) {
    for (std::size_t inner = 0; inner < stride; ++inner) {
      auto at = [&](int i) {
        const int w = ((i % n) + n) % n;
        return in[base + inner + static_cast<std::size_t>(w) * stride];
      };
      for (int i = 0; i < n; ++i) {
        double v;
        if (st == Stencil::first) {
          v = (-at(i + 2) + 8.0 * at(i + 1) - 8.0 * at(i - 1) + at(i - 2)) / (12.0 * h);
        } else {
          v = (-at(i + 2) + 16.0 * at(i + 1) - 30.0 * at(i) + 16.0 * at(i - 1) - at(i - 2)) /
              (12.0 * h * h);
        }
        out[base + inner + static_cast<std::size_t>(i) * stride] = v;
      }
    }
  }
  return out;
}

std::vector<double> central4_partial(const GridSpec& spec, std::span<const double> values,
                                     const std::array<int, kMaxDim>& orders) {
  std::vector<double> cur(values.begin(), values.end());
  for (int a = 0; a < spec.dim(); ++a) {
    int m = orders[a];
    while (m >= 2) {
      cur = apply_stencil(spec, cur, a, Stencil::second);
      m -= 2;
    }
    if (m == 1) cur = apply_stencil(spec, cur, a, Stencil::first);
  }
  return cur;
}

void check_orders(const std::array<int, kMaxDim>& orders) {
  int total = 0;
  for (int m : orders) {
    if (m < 0) throw UnsupportedOrderError("negative derivative order");
    total += m;
  }
  if (total > 4) {
    throw UnsupportedOrderError("derivative order " + std::to_string(total) +
                                " exceeds the supported maximum of 4");
  }
}

/// Derivatives for a set of components, sharing work between them.
class PartialEngine {
 public:
  PartialEngine(const ScalarField& f, Scheme scheme) : f_(f), scheme_(scheme) {
    if (scheme_ == Scheme::spectral) {
      spectral_ = std::make_unique<detail::SpectralDifferentiator>(f.spec(), f.values());
    }
  }

  std::vector<double> operator()(const std::array<int, kMaxDim>& orders) const {
    if (scheme_ == Scheme::spectral) return spectral_->partial(orders);
    return central4_partial(f_.spec(), f_.values(), orders);
  }

 private:
  const ScalarField& f_;
  Scheme scheme_;
  std::unique_ptr<detail::SpectralDifferentiator> spectral_;
};

template <int Rank>
SymTensorField<Rank> tensor_from(const PartialEngine& eng, const GridSpec& spec) {
  const auto& t = SymIndexTable::get(spec.dim(), Rank);
  std::vector<std::vector<double>> comps;
  comps.reserve(t.indices.size());
  for (std::size_t c = 0; c < t.indices.size(); ++c) {
    comps.push_back(eng(t.axis_orders(static_cast<int>(c))));
  }
  return {spec, std::move(comps)};
}

}  // namespace

template <int Rank>
SymTensorField<Rank> derivative(const ScalarField& f, Scheme scheme) {
  PartialEngine eng(f, scheme);
  return tensor_from<Rank>(eng, f.spec());
}

template VectorField derivative<1>(const ScalarField&, Scheme);
template SymMatrixField derivative<2>(const ScalarField&, Scheme);
template SymTensor3Field derivative<3>(const ScalarField&, Scheme);
template SymTensor4Field derivative<4>(const ScalarField&, Scheme);

AnyDerivative derivative(const ScalarField& f, int order, Scheme scheme) {
  switch (order) {
    case 1: return derivative<1>(f, scheme);
    case 2: return derivative<2>(f, scheme);
    case 3: return derivative<3>(f, scheme);
    case 4: return derivative<4>(f, scheme);
    default:
      throw UnsupportedOrderError("derivative order " + std::to_string(order) +
                                  " is not in 1..4");
  }
}

Jets compute_jets(const ScalarField& f, int max_order, Scheme scheme) {
  if (max_order < 2 || max_order > 4) {
    throw UnsupportedOrderError("jets need a maximum order in 2..4");
  }
  PartialEngine eng(f, scheme);
  Jets j{tensor_from<1>(eng, f.spec()), tensor_from<2>(eng, f.spec()), std::nullopt,
         std::nullopt};
  if (max_order >= 3) j.d3u = tensor_from<3>(eng, f.spec());
  if (max_order >= 4) j.d4u = tensor_from<4>(eng, f.spec());
  return j;
}

ScalarField partial(const ScalarField& f, const std::array<int, kMaxDim>& orders, Scheme scheme) {
  check_orders(orders);
  for (int a = f.spec().dim(); a < kMaxDim; ++a) {
    if (orders[a] != 0) throw InvalidArgumentError("derivative along a missing axis");
  }
  PartialEngine eng(f, scheme);
  return {f.spec(), eng(orders)};
}

ScalarField partial(const ScalarField& f, int axis, Scheme scheme) {
  std::array<int, kMaxDim> orders{};
  if (axis < 0 || axis >= f.spec().dim()) throw InvalidArgumentError("axis out of range");
  orders[axis] = 1;
  return partial(f, orders, scheme);
}

ScalarField prolongate(const ScalarField& f, const GridSpec& fine) {
  const GridSpec& coarse = f.spec();
  bool ok = coarse.dim() == fine.dim();
  for (int a = 0; ok && a < coarse.dim(); ++a) {
    ok = fine.size(a) >= coarse.size(a) && fine.period(a) == coarse.period(a);
  }
  if (!ok) throw SpecMismatchError("prolongation needs a finer grid with equal periods");
  return {fine, detail::SpectralDifferentiator(coarse, f.values()).prolongate(fine)};
}

ScalarField laplacian_flat(const ScalarField& f, Scheme scheme) {
  PartialEngine eng(f, scheme);
  std::vector<double> sum(f.size(), 0.0);
  for (int a = 0; a < f.spec().dim(); ++a) {
    std::array<int, kMaxDim> orders{};
    orders[a] = 2;
    const auto d = eng(orders);
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += d[i];
  }
  return {f.spec(), std::move(sum)};
}

double sup_norm(const ScalarField& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

template <int Rank>
double sup_norm(const SymTensorField<Rank>& t) {
  double m = 0.0;
  for (std::size_t p = 0; p < t.spec().point_count(); ++p) m = std::max(m, t.norm2_at(p));
  return std::sqrt(m);
}

template double sup_norm<1>(const VectorField&);
template double sup_norm<2>(const SymMatrixField&);
template double sup_norm<3>(const SymTensor3Field&);
template double sup_norm<4>(const SymTensor4Field&);

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

double l2_pairing(const ScalarField& f, const ScalarField& g, const ScalarField* weight) {
  require_same_grid(f.spec(), g.spec());
  if (weight) require_same_grid(f.spec(), weight->spec());
  std::vector<double> prod(f.size());
  for (std::size_t i = 0; i < prod.size(); ++i) {
    prod[i] = f[i] * g[i] * (weight ? (*weight)[i] : 1.0);
  }
  return pairwise_sum(prod) * f.spec().cell_volume();
}

}  // namespace lmcf
