#include "heavyset/target_set.hpp"

#include <algorithm>
#include <map>

#include "heavyset/errors.hpp"

namespace heavyset {

namespace {

const ExactScalar kOne(1);

// Splits the line arc [l, r] (r - l < 1) into lifted arcs inside [0, 1].
void lift_arc(const ExactScalar& l, const ExactScalar& r, std::vector<Arc>& out) {
  const ExactScalar lo = l.mod1();
  const ExactScalar hi = lo + (r - l);
  if (hi <= kOne) {
    out.push_back({lo, hi});
  } else {
    out.push_back({lo, kOne});
    out.push_back({ExactScalar(0), hi - kOne});
  }
}

// Lifted arcs of one endpoint pair; whole circle when the length reaches 1.
std::vector<Arc> arcs_of(const Endpoints& e) {
  std::vector<Arc> out;
  const auto& [l, r] = e;
  const ExactScalar length = l <= r ? r - l : r + kOne - l;
  if (length >= kOne) {
    out.push_back({ExactScalar(0), kOne});
  } else {
    lift_arc(l, l + length, out);
  }
  return out;
}

std::vector<Arc> merge_arcs(std::vector<Arc> arcs) {
  std::sort(arcs.begin(), arcs.end(), [](const Arc& a, const Arc& b) { return a.lo < b.lo; });
  std::vector<Arc> out;
  for (auto& a : arcs) {
    if (!out.empty() && a.lo <= out.back().hi) {
      if (a.hi > out.back().hi) out.back().hi = a.hi;
    } else {
      out.push_back(std::move(a));
    }
  }
  return out;
}

std::vector<Arc> dilate_arcs(const std::vector<Arc>& arcs, const ExactScalar& eps) {
  std::vector<Arc> out;
  for (const auto& a : arcs) {
    const auto lifted = arcs_of({a.lo - eps, a.hi + eps});
    out.insert(out.end(), lifted.begin(), lifted.end());
  }
  return merge_arcs(std::move(out));
}

// Union measure of closed boxes by coordinate compression.
ExactScalar box_union_measure(const std::vector<Box>& boxes, int dim) {
  if (boxes.empty()) return 0;
  std::vector<std::vector<ExactScalar>> cuts(dim);
  for (int k = 0; k < dim; ++k) {
    cuts[k] = {ExactScalar(0), kOne};
    for (const auto& b : boxes) {
      cuts[k].push_back(b.sides[k].lo);
      cuts[k].push_back(b.sides[k].hi);
    }
    std::sort(cuts[k].begin(), cuts[k].end());
    cuts[k].erase(std::unique(cuts[k].begin(), cuts[k].end()), cuts[k].end());
  }
  std::uint64_t cells = 1;
  for (const auto& c : cuts) {
    cells *= c.size() - 1;
    if (cells > 50'000'000) throw ResourceCap("box union too fragmented to measure exactly");
  }
  ExactScalar total = 0;
  std::vector<std::size_t> idx(dim, 0);
  for (std::uint64_t cell = 0; cell < cells; ++cell) {
    std::uint64_t rest = cell;
    for (int k = dim - 1; k >= 0; --k) {
      idx[k] = rest % (cuts[k].size() - 1);
      rest /= cuts[k].size() - 1;
    }
    const bool covered = std::any_of(boxes.begin(), boxes.end(), [&](const Box& b) {
      for (int k = 0; k < dim; ++k) {
        if (!(b.sides[k].lo <= cuts[k][idx[k]] && cuts[k][idx[k] + 1] <= b.sides[k].hi)) return false;
      }
      return true;
    });
    if (!covered) continue;
    ExactScalar volume = 1;
    for (int k = 0; k < dim; ++k) volume *= cuts[k][idx[k] + 1] - cuts[k][idx[k]];
    total += volume;
  }
  return total;
}

// Cartesian product of per-axis arc lists.
void expand_box(const std::vector<std::vector<Arc>>& axes, std::vector<Box>& out) {
  std::vector<std::size_t> idx(axes.size(), 0);
  for (;;) {
    Box b;
    for (std::size_t k = 0; k < axes.size(); ++k) b.sides.push_back(axes[k][idx[k]]);
    out.push_back(std::move(b));
    std::size_t k = 0;
    while (k < axes.size() && ++idx[k] == axes[k].size()) idx[k++] = 0;
    if (k == axes.size()) return;
  }
}

Integer power(std::uint32_t p, std::size_t n) {
  return boost::multiprecision::pow(Integer(p), static_cast<unsigned>(n));
}

}  // namespace

bool Arc::contains(const ExactScalar& y) const {
  return (lo <= y && y <= hi) || (y.is_zero() && hi == kOne);
}

bool Box::contains(const std::vector<ExactScalar>& y) const {
  for (std::size_t k = 0; k < sides.size(); ++k) {
    if (!sides[k].contains(y[k])) return false;
  }
  return true;
}

bool PAdicBall::contains(const PAdicPoint& y) const {
  return std::equal(center.digits.begin(), center.digits.begin() + static_cast<std::ptrdiff_t>(level),
                    y.digits.begin());
}

TargetSet TargetSet::intervals(const GroupSpace& space, const std::vector<Endpoints>& intervals) {
  if (!space.is_torus() || space.dim() != 1) {
    throw SpaceMismatch("interval unions live on the 1-torus, not " + space.describe());
  }
  TargetSet out(space, TargetKind::intervals);
  for (const auto& e : intervals) {
    if (e.first == e.second) {
      out.arcs_.push_back({e.first.mod1(), e.first.mod1()});
      continue;
    }
    const auto lifted = arcs_of(e);
    out.arcs_.insert(out.arcs_.end(), lifted.begin(), lifted.end());
  }
  out.normalize();
  return out;
}

TargetSet TargetSet::boxes(const GroupSpace& space, const std::vector<std::vector<Endpoints>>& boxes) {
  if (!space.is_torus()) throw SpaceMismatch("box unions live on a torus, not " + space.describe());
  TargetSet out(space, TargetKind::boxes);
  for (const auto& box : boxes) {
    if (static_cast<int>(box.size()) != space.dim()) {
      throw SpaceMismatch("box has " + std::to_string(box.size()) + " sides in " + space.describe());
    }
    std::vector<std::vector<Arc>> axes;
    for (const auto& e : box) axes.push_back(e.first == e.second
                                                 ? std::vector<Arc>{{e.first.mod1(), e.first.mod1()}}
                                                 : arcs_of(e));
    expand_box(axes, out.boxes_);
  }
  out.normalize();
  return out;
}

TargetSet TargetSet::padic_balls(const GroupSpace& space,
                                 const std::vector<std::pair<Integer, std::size_t>>& balls) {
  if (space.is_torus()) throw SpaceMismatch("p-adic balls need a p-adic space");
  TargetSet out(space, TargetKind::padic_balls);
  for (const auto& [center, level] : balls) {
    if (level > space.depth()) {
      throw DomainError("ball level " + std::to_string(level) + " exceeds depth " +
                        std::to_string(space.depth()));
    }
    out.balls_.push_back({std::get<PAdicPoint>(space.padic_point(center)), level});
  }
  out.normalize();
  return out;
}

TargetSet TargetSet::whole(const GroupSpace& space) {
  if (space.is_torus() && space.dim() == 1) return intervals(space, {{ExactScalar(0), kOne}});
  if (space.is_torus()) {
    return boxes(space, {std::vector<Endpoints>(space.dim(), Endpoints{ExactScalar(0), kOne})});
  }
  return padic_balls(space, {{Integer(0), 0}});
}

void TargetSet::normalize() {
  switch (kind_) {
    case TargetKind::intervals: {
      arcs_ = merge_arcs(std::move(arcs_));
      measure_ = 0;
      for (const auto& a : arcs_) measure_ += a.length();
      break;
    }
    case TargetKind::boxes: {
      measure_ = box_union_measure(boxes_, space_.dim());
      break;
    }
    case TargetKind::padic_balls: {
      std::sort(balls_.begin(), balls_.end(),
                [](const PAdicBall& a, const PAdicBall& b) { return a.level < b.level; });
      std::vector<PAdicBall> kept;
      for (auto& b : balls_) {
        const bool covered = std::any_of(kept.begin(), kept.end(), [&](const PAdicBall& k) {
          return k.contains(b.center);
        });
        if (!covered) kept.push_back(std::move(b));
      }
      balls_ = std::move(kept);
      measure_ = 0;
      for (const auto& b : balls_) measure_ += ExactScalar(Rational(1, power(space_.prime(), b.level)));
      break;
    }
  }
}

bool TargetSet::contains(const GroupPoint& x) const {
  space_.check(x);
  switch (kind_) {
    case TargetKind::intervals: {
      const ExactScalar& y = std::get<TorusPoint>(x).coords[0];
      if (arcs_.empty()) return false;
      if (y.is_zero() && arcs_.back().hi == kOne) return true;
      auto it = std::upper_bound(arcs_.begin(), arcs_.end(), y,
                                 [](const ExactScalar& v, const Arc& a) { return v < a.lo; });
      if (it == arcs_.begin()) return false;
      return y <= std::prev(it)->hi;
    }
    case TargetKind::boxes: {
      const auto& y = std::get<TorusPoint>(x).coords;
      return std::any_of(boxes_.begin(), boxes_.end(), [&](const Box& b) { return b.contains(y); });
    }
    case TargetKind::padic_balls: {
      const auto& y = std::get<PAdicPoint>(x);
      return std::any_of(balls_.begin(), balls_.end(), [&](const PAdicBall& b) { return b.contains(y); });
    }
  }
  return false;
}

TargetSet TargetSet::dilate(const ExactScalar& eps) const {
  if (eps.sign() <= 0) throw DomainError("dilation radius must be positive");
  TargetSet out(space_, kind_);
  switch (kind_) {
    case TargetKind::intervals:
      out.arcs_ = dilate_arcs(arcs_, eps);
      break;
    case TargetKind::boxes:
      for (const auto& b : boxes_) {
        std::vector<std::vector<Arc>> axes;
        for (const auto& side : b.sides) axes.push_back(arcs_of({side.lo - eps, side.hi + eps}));
        expand_box(axes, out.boxes_);
      }
      break;
    case TargetKind::padic_balls: {
      // smallest n with p^-n <= eps
      std::size_t n = 0;
      Integer pn = 1;
      while (ExactScalar(Rational(1, pn)) > eps && n < space_.depth()) {
        pn *= space_.prime();
        ++n;
      }
      for (const auto& b : balls_) out.balls_.push_back({b.center, std::min(b.level, n)});
      break;
    }
  }
  out.normalize();
  return out;
}

Rational TargetSet::boundary_dimension() const {
  if (kind_ == TargetKind::boxes) return space_.dim() - 1;
  return 0;
}

std::size_t TargetSet::circle_components() const {
  if (kind_ != TargetKind::intervals) throw DomainError("circle_components on a non-interval set");
  if (arcs_.empty()) return 0;
  std::size_t n = arcs_.size();
  if (n > 1 && arcs_.front().lo.is_zero() && arcs_.back().hi == kOne) --n;
  return n;
}

std::string TargetSet::describe() const {
  std::string out;
  switch (kind_) {
    case TargetKind::intervals:
      out = "intervals";
      for (const auto& a : arcs_) out += " [" + a.lo.to_string() + ", " + a.hi.to_string() + "]";
      break;
    case TargetKind::boxes:
      out = "boxes";
      for (const auto& b : boxes_) {
        out += " ";
        for (std::size_t k = 0; k < b.sides.size(); ++k) {
          if (k) out += "x";
          out += "[" + b.sides[k].lo.to_string() + ", " + b.sides[k].hi.to_string() + "]";
        }
      }
      break;
    case TargetKind::padic_balls:
      out = "padic_balls";
      for (const auto& b : balls_) {
        out += " B(" + b.center.value().str() + ", p^-" + std::to_string(b.level) + ")";
      }
      break;
  }
  return out;
}

ContentCertificate content_certificate(const TargetSet& set, std::span<const ExactScalar> eps_grid) {
  if (eps_grid.empty()) throw DomainError("content_certificate needs a nonempty eps grid");
  ContentCertificate cert;
  cert.s = set.boundary_dimension();
  const Rational codim = Rational(set.space().exponent()) - cert.s;
  if (denominator_of(codim) != 1 || codim < 0) throw DomainError("non-integral codimension");
  const auto power = numerator_of(codim).convert_to<unsigned>();
  if (set.kind() == TargetKind::intervals) {
    cert.analytic_c1 = ExactScalar(static_cast<long long>(2 * set.circle_components()));
  }
  cert.c1 = 0;
  cert.eps_max = eps_grid.front();
  cert.eps_min = eps_grid.front();
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    const ExactScalar& eps = eps_grid[i];
    if (i > 0 && !(eps < eps_grid[i - 1])) throw DomainError("eps grid must be decreasing");
    const ExactScalar growth = set.dilate(eps).measure() - set.measure();
    cert.growth.emplace_back(eps, growth);
    cert.c1 = max(cert.c1, growth / pow(eps, power));
    cert.eps_min = eps;
  }
  cert.holds = true;
  for (const auto& [eps, growth] : cert.growth) {
    const ExactScalar scale = pow(eps, power);
    if (growth > cert.c1 * scale) cert.holds = false;
    if (cert.analytic_c1 && growth > *cert.analytic_c1 * scale) cert.holds = false;
  }
  return cert;
}

bool content_fallback_holds(const TargetSet& set, std::span<const ExactScalar> eps_grid,
                            const Rational& s, double tau) {
  if (tau <= 0) throw DomainError("tau must be positive");
  const double exponent = (Rational(set.space().exponent()) - s).convert_to<double>() - tau;
  for (const auto& eps : eps_grid) {
    const ExactScalar growth = set.dilate(eps).measure() - set.measure();
    if (growth.is_zero()) continue;
    if (growth.log_abs() > exponent * eps.log_abs()) return false;
  }
  return true;
}

}  // namespace heavyset
