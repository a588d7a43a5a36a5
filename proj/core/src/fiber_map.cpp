#include "blenderlab/fiber_map.hpp"

#include "blenderlab/errors.hpp"

#include <algorithm>
#include <cmath>

namespace blenderlab {

// ---------------------------------------------------------------- cores

BumpCore BumpCore::point(Vec c) {
  BumpCore k;
  k.kind = Kind::Point;
  k.center = std::move(c);
  return k;
}

BumpCore BumpCore::ball(Vec c, double r) {
  if (!(r >= 0.0)) throw ParamError("core radius must be non-negative");
  BumpCore k;
  k.kind = r > 0.0 ? Kind::Ball : Kind::Point;
  k.center = std::move(c);
  k.radius = r;
  return k;
}

BumpCore BumpCore::box(Vec c, Vec hw) {
  if (c.size() != hw.size()) throw DimensionError("core box size mismatch");
  if ((hw.array() < 0.0).any()) throw ParamError("core half-widths must be non-negative");
  BumpCore k;
  k.kind = Kind::Box;
  k.center = std::move(c);
  k.half_widths = std::move(hw);
  return k;
}

BumpCore BumpCore::from_region(const Region& r) {
  if (r.kind() == Region::Kind::Ball) return ball(r.center(), r.radius());
  return box(r.center(), r.half_widths());
}

double BumpCore::distance(const Vec& z) const {
  switch (kind) {
    case Kind::Point:
      return (z - center).norm();
    case Kind::Ball:
      return std::max(0.0, (z - center).norm() - radius);
    case Kind::Box:
      return ((z - center).cwiseAbs() - half_widths).cwiseMax(0.0).norm();
  }
  return 0.0;
}

double BumpCore::distance_derivatives(const Vec& z, Vec& grad, Mat* hess) const {
  const int c = dimension();
  if (kind == Kind::Box) {
    Vec rel = z - center;
    Vec excess(c);
    Vec active = Vec::Zero(c);
    for (int i = 0; i < c; ++i) {
      const double e = std::abs(rel(i)) - half_widths(i);
      if (e > 0.0) {
        excess(i) = rel(i) > 0 ? e : -e;
        active(i) = 1.0;
      } else {
        excess(i) = 0.0;
      }
    }
    const double d = excess.norm();
    grad = d > 0.0 ? Vec(excess / d) : Vec(Vec::Zero(c));
    if (hess) {
      if (d > 0.0)
        *hess = (Mat(active.asDiagonal()) - grad * grad.transpose()) / d;
      else
        *hess = Mat::Zero(c, c);
    }
    return d;
  }
  Vec rel = z - center;
  const double n = rel.norm();
  const double d = std::max(0.0, n - radius);
  grad = n > 0.0 ? Vec(rel / n) : Vec(Vec::Zero(c));
  if (hess) {
    if (n > 0.0)
      *hess = (Mat::Identity(c, c) - grad * grad.transpose()) / n;
    else
      *hess = Mat::Zero(c, c);
  }
  return d;
}

double BumpCore::extent() const {
  if (kind == Kind::Box) return half_widths.norm();
  return radius;
}

double BumpCore::gap_to(const BumpCore& o) const {
  if (kind == Kind::Box && o.kind == Kind::Box)
    return ((center - o.center).cwiseAbs() - half_widths - o.half_widths).cwiseMax(0.0).norm();
  if (o.kind != Kind::Box) return distance(o.center) - o.radius;
  return o.distance(center) - radius;
}

json BumpCore::to_json() const {
  switch (kind) {
    case Kind::Point:
      return json{{"kind", "point"}, {"center", vec_to_json(center)}};
    case Kind::Ball:
      return json{{"kind", "ball"}, {"center", vec_to_json(center)}, {"radius", radius}};
    case Kind::Box:
      return json{{"kind", "box"}, {"center", vec_to_json(center)}, {"half_widths", vec_to_json(half_widths)}};
  }
  return {};
}

BumpCore BumpCore::from_json(const json& j) {
  const auto k = j.at("kind").get<std::string>();
  if (k == "point") return point(vec_from_json(j.at("center")));
  if (k == "ball") return ball(vec_from_json(j.at("center")), j.at("radius").get<double>());
  if (k == "box") return box(vec_from_json(j.at("center")), vec_from_json(j.at("half_widths")));
  throw ParamError("unknown core kind '" + k + "'");
}

// ---------------------------------------------------------------- nodes

namespace detail {

using NodePtr = std::shared_ptr<const Node>;

struct Node {
  virtual ~Node() = default;
  virtual FiberMap::Kind kind() const = 0;
  virtual int dim() const = 0;
  virtual Vec apply(const Vec& x) const = 0;
  virtual Vec apply_inverse(const Vec& y) const = 0;
  virtual Mat jacobian(const Vec& x) const = 0;
  virtual Mat inverse_jacobian(const Vec& y) const = 0;
  virtual double lipschitz() const = 0;
  virtual double inverse_lipschitz() const = 0;
  virtual double lipschitz_on(const Vec&, double) const { return lipschitz(); }
  virtual double inverse_lipschitz_on(const Vec&, double) const { return inverse_lipschitz(); }
  virtual NodePtr inverse() const = 0;
  virtual bool affine(Mat* a, Vec* b) const = 0;
  virtual json to_json() const = 0;
  virtual std::vector<NodePtr> children() const { return {}; }

  static FiberMap wrap(NodePtr n) { return FiberMap(std::move(n)); }
  static const NodePtr& unwrap(const FiberMap& f) { return f.node_; }
};

namespace {

class AffineNode final : public Node {
 public:
  AffineNode(Mat a, Vec b) : a_(std::move(a)), b_(std::move(b)) {
    if (a_.rows() != a_.cols() || a_.rows() != b_.size()) throw DimensionError("affine map shape mismatch");
    Eigen::FullPivLU<Mat> lu(a_);
    if (!lu.isInvertible()) throw ParamError("affine map is not invertible");
    ainv_ = lu.inverse();
    lip_ = spectral_norm(a_);
    ilip_ = spectral_norm(ainv_);
  }
  AffineNode(Mat a, Vec b, Mat ainv, double lip, double ilip)
      : a_(std::move(a)), b_(std::move(b)), ainv_(std::move(ainv)), lip_(lip), ilip_(ilip) {}

  FiberMap::Kind kind() const override { return FiberMap::Kind::Affine; }
  int dim() const override { return static_cast<int>(b_.size()); }
  Vec apply(const Vec& x) const override { return a_ * x + b_; }
  Vec apply_inverse(const Vec& y) const override { return ainv_ * (y - b_); }
  Mat jacobian(const Vec&) const override { return a_; }
  Mat inverse_jacobian(const Vec&) const override { return ainv_; }
  double lipschitz() const override { return lip_; }
  double inverse_lipschitz() const override { return ilip_; }
  NodePtr inverse() const override {
    return std::make_shared<AffineNode>(ainv_, -(ainv_ * b_), a_, ilip_, lip_);
  }
  bool affine(Mat* a, Vec* b) const override {
    if (a) *a = a_;
    if (b) *b = b_;
    return true;
  }
  json to_json() const override {
    return json{{"type", "affine"}, {"linear", mat_to_json(a_)}, {"offset", vec_to_json(b_)}};
  }

 private:
  Mat a_;
  Vec b_;
  Mat ainv_;
  double lip_ = 1.0;
  double ilip_ = 1.0;
};

// quintic smoothstep profile on [plateau, outer]
struct Profile {
  double a, w;
  void eval(double d, double& chi, double& d1, double& d2) const {
    if (d <= a) {
      chi = 1.0;
      d1 = d2 = 0.0;
      return;
    }
    const double s = (d - a) / w;
    if (s >= 1.0) {
      chi = d1 = d2 = 0.0;
      return;
    }
    const double s2 = s * s;
    chi = 1.0 - s2 * s * (10.0 - 15.0 * s + 6.0 * s2);
    d1 = -30.0 * s2 * (1.0 - s) * (1.0 - s) / w;
    d2 = -60.0 * s * (1.0 - s) * (1.0 - 2.0 * s) / (w * w);
  }
};

constexpr double kChi1Max = 1.875;             // max |S'| of the quintic smoothstep
constexpr double kChi2Max = 5.773502691896258;  // max |S''| = 10/sqrt(3)
constexpr int kMaxSteps = 4096;

class BumpNode final : public Node {
 public:
  explicit BumpNode(BumpSpec s) : s_(std::move(s)) {
    const int c = s_.core.dimension();
    if (s_.velocity.size() != c) throw DimensionError("bump velocity dimension mismatch");
    if (!(s_.plateau >= 0.0) || !(s_.outer > s_.plateau)) throw ParamError("bump needs 0 <= plateau < outer");
    if (s_.hamiltonian && c % 2 != 0) throw DimensionError("Hamiltonian bump needs even dimension");
    if (s_.hamiltonian && !(s_.plateau > 0.0)) throw ParamError("Hamiltonian bump needs a positive plateau");
    prof_ = Profile{s_.plateau, s_.outer - s_.plateau};
    speed_ = s_.velocity.norm();
    if (s_.hamiltonian) {
      grad_l_ = apply_j(s_.velocity);
      const double g = s_.core.extent() + s_.outer;
      const double w = prof_.w;
      field_bound_ = speed_ * (kChi2Max * g / (w * w) + 2.0 * kChi1Max / w + kChi1Max * g / (w * s_.plateau));
    } else {
      field_bound_ = speed_ * kChi1Max / prof_.w;
    }
    if (s_.steps > 0) {
      steps_ = s_.steps;
    } else {
      calibrate();
    }
    s_.steps = steps_;
    const double q = field_bound_ / (2.0 * steps_);
    if (q >= 1.0) throw StepSizeError("bump step count too small for its field bound");
    lip_ = std::pow((1.0 + q) / (1.0 - q), steps_);
  }

  FiberMap::Kind kind() const override { return FiberMap::Kind::Bump; }
  int dim() const override { return s_.core.dimension(); }
  Vec apply(const Vec& x) const override { return flow(x, 1.0, nullptr); }
  Vec apply_inverse(const Vec& y) const override { return flow(y, -1.0, nullptr); }
  Mat jacobian(const Vec& x) const override {
    Mat j;
    flow(x, 1.0, &j);
    return j;
  }
  Mat inverse_jacobian(const Vec& y) const override {
    Mat j;
    flow(y, -1.0, &j);
    return j;
  }
  double lipschitz() const override { return lip_; }
  double inverse_lipschitz() const override { return lip_; }
  double lipschitz_on(const Vec& c, double r) const override {
    const double d = s_.core.distance(c);
    if (d + r + speed_ <= s_.plateau) return 1.0;
    if (d - r >= s_.outer) return 1.0;
    return lip_;
  }
  double inverse_lipschitz_on(const Vec& c, double r) const override { return lipschitz_on(c, r); }
  NodePtr inverse() const override {
    BumpSpec inv = s_;
    inv.velocity = -s_.velocity;
    return std::make_shared<BumpNode>(inv);
  }
  bool affine(Mat*, Vec*) const override { return false; }
  json to_json() const override {
    if (s_.r_inner && s_.core.kind == BumpCore::Kind::Point) {
      return json{{"type", "bump_translation"},
                  {"center", vec_to_json(s_.core.center)},
                  {"r_inner", *s_.r_inner},
                  {"r_outer", s_.outer},
                  {"vector", vec_to_json(s_.velocity)},
                  {"hamiltonian", s_.hamiltonian},
                  {"steps", steps_}};
    }
    return json{{"type", "bump_flow"},     {"core", s_.core.to_json()},        {"plateau", s_.plateau},
                {"outer", s_.outer},       {"velocity", vec_to_json(s_.velocity)}, {"hamiltonian", s_.hamiltonian},
                {"steps", steps_}};
  }

  const BumpSpec& spec() const { return s_; }
  bool in_support(const Vec& x) const { return s_.core.distance(x) < s_.outer; }

 private:
  Vec apply_j(const Vec& u) const {
    const int n = static_cast<int>(u.size()) / 2;
    Vec r(u.size());
    r.head(n) = u.tail(n);
    r.tail(n) = -u.head(n);
    return r;
  }

  // field value and, if requested, its derivative
  void field(const Vec& z, Vec& x, Mat* a) const {
    const int c = dim();
    Vec grad;
    Mat hess;
    const double d = s_.core.distance_derivatives(z, grad, (a && s_.hamiltonian) ? &hess : nullptr);
    double chi, d1, d2;
    prof_.eval(d, chi, d1, d2);
    if (chi == 0.0 && d1 == 0.0) {
      x = Vec::Zero(c);
      if (a) *a = Mat::Zero(c, c);
      return;
    }
    if (!s_.hamiltonian) {
      x = chi * s_.velocity;
      if (a) *a = s_.velocity * (d1 * grad).transpose();
      return;
    }
    const double l = grad_l_.dot(z - s_.core.center);
    x = chi * s_.velocity - (d1 * l) * apply_j(grad);
    if (a) {
      Mat h = (d2 * l) * grad * grad.transpose() + d1 * (grad * grad_l_.transpose() + grad_l_ * grad.transpose());
      if (d1 != 0.0) h += (d1 * l) * hess;
      // -J h
      const int n = c / 2;
      Mat jh(c, c);
      jh.topRows(n) = -h.bottomRows(n);
      jh.bottomRows(n) = h.topRows(n);
      *a = jh;
    }
  }

  Vec step(const Vec& z, double hh, Mat* stepjac) const {
    const int c = dim();
    Vec x;
    Mat a;
    field(z, x, nullptr);
    Vec zn = z + hh * x;
    const double scale = 1.0 + z.norm();
    for (int it = 0; it < 50; ++it) {
      Vec mid = 0.5 * (z + zn);
      field(mid, x, &a);
      Vec res = zn - z - hh * x;
      Mat jf = Mat::Identity(c, c) - (0.5 * hh) * a;
      Vec delta = jf.partialPivLu().solve(res);
      zn -= delta;
      if (delta.norm() <= s_.solver_tol * scale) break;
    }
    if (stepjac) {
      Vec mid = 0.5 * (z + zn);
      field(mid, x, &a);
      Mat lhs = Mat::Identity(c, c) - (0.5 * hh) * a;
      Mat rhs = Mat::Identity(c, c) + (0.5 * hh) * a;
      *stepjac = lhs.partialPivLu().solve(rhs);
    }
    return zn;
  }

  Vec run(const Vec& z0, double sign, int n, Mat* jac) const {
    const int c = dim();
    const double d0 = s_.core.distance(z0);
    if (jac) *jac = Mat::Identity(c, c);
    if (d0 + speed_ <= s_.plateau) return z0 + sign * s_.velocity;
    if (d0 >= s_.outer) return z0;
    const double hh = sign / n;
    Vec z = z0;
    Mat sj;
    for (int k = 0; k < n; ++k) {
      z = step(z, hh, jac ? &sj : nullptr);
      if (jac) *jac = sj * (*jac);
    }
    return z;
  }

  Vec flow(const Vec& z0, double sign, Mat* jac) const {
    if (z0.size() != dim()) throw DimensionError("point dimension does not match bump map");
    return run(z0, sign, steps_, jac);
  }

  // points at several depths of the transition layer along a few rays
  std::vector<Vec> probes() const {
    const int c = dim();
    std::vector<Vec> dirs;
    Vec v = speed_ > 0 ? Vec(s_.velocity / speed_) : Vec(Vec::Unit(c, 0));
    dirs.push_back(v);
    dirs.push_back(-v);
    if (c >= 2) {
      Vec perp = s_.hamiltonian ? apply_j(v) : Vec(Vec::Unit(c, v(0) * v(0) < 0.5 ? 0 : 1));
      perp -= perp.dot(v) * v;
      if (perp.norm() > 1e-12) {
        perp.normalize();
        dirs.push_back(perp);
        dirs.push_back(-perp);
        dirs.push_back((v + perp).normalized());
        dirs.push_back((perp - v).normalized());
      }
    }
    const double a = s_.plateau, w = prof_.w;
    const double targets[] = {std::max(0.0, a - 0.5 * speed_), a + 0.2 * w, a + 0.45 * w, a + 0.7 * w, a + 0.9 * w};
    std::vector<Vec> pts;
    for (const auto& dir : dirs) {
      for (double t : targets) {
        // distance along the ray is monotone for convex cores
        double lo = 0.0, hi = s_.core.extent() + s_.outer + 1.0;
        for (int it = 0; it < 80; ++it) {
          const double mid = 0.5 * (lo + hi);
          if (s_.core.distance(s_.core.center + mid * dir) < t)
            lo = mid;
          else
            hi = mid;
        }
        pts.push_back(s_.core.center + hi * dir);
      }
    }
    return pts;
  }

  void calibrate() {
    int n = std::max(1, static_cast<int>(std::ceil(4.0 * field_bound_)));
    if (speed_ == 0.0) {
      steps_ = 1;
      return;
    }
    const auto pts = probes();
    while (n < kMaxSteps) {
      double diff = 0.0;
      for (const auto& p : pts) diff = std::max(diff, (run(p, 1.0, n, nullptr) - run(p, 1.0, 2 * n, nullptr)).norm());
      if (diff <= s_.accuracy * speed_) break;
      n *= 2;
    }
    steps_ = std::min(n, kMaxSteps);
  }

  BumpSpec s_;
  Profile prof_{};
  Vec grad_l_;
  double speed_ = 0.0;
  double field_bound_ = 0.0;
  int steps_ = 1;
  double lip_ = 1.0;
};

class CompositeNode final : public Node {
 public:
  explicit CompositeNode(std::vector<NodePtr> parts) : parts_(std::move(parts)) {
    if (parts_.empty()) throw ParamError("empty composite");
    for (const auto& p : parts_)
      if (p->dim() != parts_.front()->dim()) throw DimensionError("composite parts differ in dimension");
  }
  FiberMap::Kind kind() const override { return FiberMap::Kind::Composite; }
  int dim() const override { return parts_.front()->dim(); }
  Vec apply(const Vec& x) const override {
    Vec y = x;
    for (const auto& p : parts_) y = p->apply(y);
    return y;
  }
  Vec apply_inverse(const Vec& y) const override {
    Vec x = y;
    for (auto it = parts_.rbegin(); it != parts_.rend(); ++it) x = (*it)->apply_inverse(x);
    return x;
  }
  Mat jacobian(const Vec& x) const override {
    Vec y = x;
    Mat j = Mat::Identity(dim(), dim());
    for (const auto& p : parts_) {
      j = p->jacobian(y) * j;
      y = p->apply(y);
    }
    return j;
  }
  Mat inverse_jacobian(const Vec& y) const override {
    Vec x = y;
    Mat j = Mat::Identity(dim(), dim());
    for (auto it = parts_.rbegin(); it != parts_.rend(); ++it) {
      j = (*it)->inverse_jacobian(x) * j;
      x = (*it)->apply_inverse(x);
    }
    return j;
  }
  double lipschitz() const override {
    double l = 1.0;
    for (const auto& p : parts_) l *= p->lipschitz();
    return l;
  }
  double inverse_lipschitz() const override {
    double l = 1.0;
    for (const auto& p : parts_) l *= p->inverse_lipschitz();
    return l;
  }
  double lipschitz_on(const Vec& c, double r) const override {
    Vec y = c;
    double rad = r, l = 1.0;
    for (const auto& p : parts_) {
      const double lp = p->lipschitz_on(y, rad);
      l *= lp;
      y = p->apply(y);
      rad *= lp;
    }
    return l;
  }
  double inverse_lipschitz_on(const Vec& c, double r) const override {
    Vec x = c;
    double rad = r, l = 1.0;
    for (auto it = parts_.rbegin(); it != parts_.rend(); ++it) {
      const double lp = (*it)->inverse_lipschitz_on(x, rad);
      l *= lp;
      x = (*it)->apply_inverse(x);
      rad *= lp;
    }
    return l;
  }
  NodePtr inverse() const override {
    std::vector<NodePtr> inv;
    for (auto it = parts_.rbegin(); it != parts_.rend(); ++it) inv.push_back((*it)->inverse());
    return std::make_shared<CompositeNode>(std::move(inv));
  }
  bool affine(Mat* a, Vec* b) const override {
    Mat acc = Mat::Identity(dim(), dim());
    Vec off = Vec::Zero(dim());
    for (const auto& p : parts_) {
      Mat pa;
      Vec pb;
      if (!p->affine(&pa, &pb)) return false;
      acc = pa * acc;
      off = pa * off + pb;
    }
    if (a) *a = acc;
    if (b) *b = off;
    return true;
  }
  json to_json() const override {
    json arr = json::array();
    for (const auto& p : parts_) arr.push_back(p->to_json());
    return json{{"type", "composite"}, {"maps", arr}};
  }
  std::vector<NodePtr> children() const override { return parts_; }

 private:
  std::vector<NodePtr> parts_;
};

class GluedNode final : public Node {
 public:
  explicit GluedNode(std::vector<std::shared_ptr<const BumpNode>> pieces) : pieces_(std::move(pieces)) {
    if (pieces_.empty()) throw ParamError("glued map needs at least one piece");
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      if (pieces_[i]->dim() != pieces_[0]->dim()) throw DimensionError("glued pieces differ in dimension");
      for (std::size_t k = i + 1; k < pieces_.size(); ++k) {
        const auto& a = pieces_[i]->spec();
        const auto& b = pieces_[k]->spec();
        if (a.core.gap_to(b.core) < a.outer + b.outer - 1e-12)
          throw ParamError("glued pieces have overlapping supports");
      }
    }
  }
  FiberMap::Kind kind() const override { return FiberMap::Kind::Glued; }
  int dim() const override { return pieces_.front()->dim(); }
  const BumpNode* find(const Vec& x) const {
    for (const auto& p : pieces_)
      if (p->in_support(x)) return p.get();
    return nullptr;
  }
  Vec apply(const Vec& x) const override {
    const BumpNode* p = find(x);
    return p ? p->apply(x) : x;
  }
  Vec apply_inverse(const Vec& y) const override {
    const BumpNode* p = find(y);
    return p ? p->apply_inverse(y) : y;
  }
  Mat jacobian(const Vec& x) const override {
    const BumpNode* p = find(x);
    return p ? p->jacobian(x) : Mat(Mat::Identity(dim(), dim()));
  }
  Mat inverse_jacobian(const Vec& y) const override {
    const BumpNode* p = find(y);
    return p ? p->inverse_jacobian(y) : Mat(Mat::Identity(dim(), dim()));
  }
  double lipschitz() const override {
    double l = 1.0;
    for (const auto& p : pieces_) l = std::max(l, p->lipschitz());
    return l;
  }
  double inverse_lipschitz() const override { return lipschitz(); }
  double lipschitz_on(const Vec& c, double r) const override {
    double l = 1.0;
    for (const auto& p : pieces_)
      if (p->spec().core.distance(c) - r < p->spec().outer) l = std::max(l, p->lipschitz_on(c, r));
    return l;
  }
  double inverse_lipschitz_on(const Vec& c, double r) const override { return lipschitz_on(c, r); }
  NodePtr inverse() const override {
    std::vector<std::shared_ptr<const BumpNode>> inv;
    for (const auto& p : pieces_) inv.push_back(std::static_pointer_cast<const BumpNode>(p->inverse()));
    return std::make_shared<GluedNode>(std::move(inv));
  }
  bool affine(Mat*, Vec*) const override { return false; }
  json to_json() const override {
    json arr = json::array();
    for (const auto& p : pieces_) arr.push_back(p->to_json());
    return json{{"type", "glued"}, {"pieces", arr}};
  }
  std::vector<NodePtr> children() const override { return {pieces_.begin(), pieces_.end()}; }

 private:
  std::vector<std::shared_ptr<const BumpNode>> pieces_;
};

}  // namespace
}  // namespace detail

// ---------------------------------------------------------------- FiberMap

using detail::Node;
using detail::NodePtr;

FiberMap FiberMap::affine(Mat linear, Vec offset) {
  return Node::wrap(std::make_shared<detail::AffineNode>(std::move(linear), std::move(offset)));
}

FiberMap FiberMap::identity(int c) { return affine(Mat::Identity(c, c), Vec::Zero(c)); }

FiberMap FiberMap::translation(Vec t) {
  const int c = static_cast<int>(t.size());
  return affine(Mat::Identity(c, c), std::move(t));
}

FiberMap FiberMap::bump(BumpSpec spec) { return Node::wrap(std::make_shared<detail::BumpNode>(std::move(spec))); }

FiberMap FiberMap::composite(const std::vector<FiberMap>& maps) {
  std::vector<NodePtr> parts;
  for (const auto& m : maps) {
    if (!m.valid()) throw ParamError("composite of an empty map");
    parts.push_back(Node::unwrap(m));
  }
  if (parts.size() == 1) return maps.front();
  return Node::wrap(std::make_shared<detail::CompositeNode>(std::move(parts)));
}

FiberMap FiberMap::glued(const std::vector<FiberMap>& pieces) {
  std::vector<std::shared_ptr<const detail::BumpNode>> bumps;
  for (const auto& p : pieces) {
    auto b = std::dynamic_pointer_cast<const detail::BumpNode>(Node::unwrap(p));
    if (!b) throw ParamError("glued pieces must be bump maps");
    bumps.push_back(std::move(b));
  }
  return Node::wrap(std::make_shared<detail::GluedNode>(std::move(bumps)));
}

namespace {
const Node& need(const std::shared_ptr<const Node>& n) {
  if (!n) throw ParamError("operation on an empty FiberMap");
  return *n;
}
void check_dim(const Node& n, const Vec& x) {
  if (x.size() != n.dim()) throw DimensionError("point dimension does not match map");
}
}  // namespace

FiberMap::Kind FiberMap::kind() const { return need(node_).kind(); }
int FiberMap::dimension() const { return need(node_).dim(); }

Vec FiberMap::apply(const Vec& x) const {
  check_dim(need(node_), x);
  return node_->apply(x);
}
Vec FiberMap::apply_inverse(const Vec& y) const {
  check_dim(need(node_), y);
  return node_->apply_inverse(y);
}
Mat FiberMap::jacobian(const Vec& x) const {
  check_dim(need(node_), x);
  return node_->jacobian(x);
}
Mat FiberMap::inverse_jacobian(const Vec& y) const {
  check_dim(need(node_), y);
  return node_->inverse_jacobian(y);
}
double FiberMap::lipschitz() const { return need(node_).lipschitz(); }
double FiberMap::inverse_lipschitz() const { return need(node_).inverse_lipschitz(); }
double FiberMap::lipschitz_on(const Vec& c, double r) const { return need(node_).lipschitz_on(c, r); }
double FiberMap::inverse_lipschitz_on(const Vec& c, double r) const {
  return need(node_).inverse_lipschitz_on(c, r);
}
FiberMap FiberMap::inverse() const { return FiberMap(need(node_).inverse()); }
FiberMap FiberMap::then(const FiberMap& other) const { return composite({*this, other}); }

bool FiberMap::is_affine() const { return need(node_).affine(nullptr, nullptr); }

Mat FiberMap::linear_part() const {
  Mat a;
  if (!need(node_).affine(&a, nullptr)) throw ShapeError("map is not affine");
  return a;
}

Vec FiberMap::offset() const {
  Vec b;
  if (!need(node_).affine(nullptr, &b)) throw ShapeError("map is not affine");
  return b;
}

const BumpSpec& FiberMap::bump_spec() const {
  auto b = dynamic_cast<const detail::BumpNode*>(&need(node_));
  if (!b) throw ShapeError("map is not a bump map");
  return b->spec();
}

int FiberMap::bump_steps() const { return bump_spec().steps; }

std::vector<FiberMap> FiberMap::parts() const {
  std::vector<FiberMap> out;
  for (auto& c : need(node_).children()) out.push_back(FiberMap(c));
  return out;
}

json FiberMap::to_json() const { return need(node_).to_json(); }

FiberMap FiberMap::from_json(const json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "affine") return affine(mat_from_json(j.at("linear")), vec_from_json(j.at("offset")));
  if (type == "translation") return translation(vec_from_json(j.at("vector")));
  if (type == "bump_translation") {
    Vec v = vec_from_json(j.at("vector"));
    const double ri = j.at("r_inner").get<double>();
    BumpSpec s;
    s.core = BumpCore::point(vec_from_json(j.at("center")));
    s.plateau = ri + v.norm();
    s.outer = j.at("r_outer").get<double>();
    s.velocity = v;
    s.hamiltonian = j.value("hamiltonian", v.size() % 2 == 0);
    s.steps = j.value("steps", 0);
    s.r_inner = ri;
    return bump(std::move(s));
  }
  if (type == "bump_flow") {
    BumpSpec s;
    s.core = BumpCore::from_json(j.at("core"));
    s.plateau = j.at("plateau").get<double>();
    s.outer = j.at("outer").get<double>();
    s.velocity = vec_from_json(j.at("velocity"));
    s.hamiltonian = j.value("hamiltonian", true);
    s.steps = j.value("steps", 0);
    return bump(std::move(s));
  }
  if (type == "composite") {
    std::vector<FiberMap> parts;
    for (const auto& m : j.at("maps")) parts.push_back(from_json(m));
    return composite(parts);
  }
  if (type == "glued") {
    std::vector<FiberMap> parts;
    for (const auto& m : j.at("pieces")) parts.push_back(from_json(m));
    return glued(parts);
  }
  throw ParamError("unknown fiber map type '" + type + "'");
}

double sup_displacement(const FiberMap& f, const std::vector<Vec>& points) {
  double s = 0.0;
  for (const auto& p : points) s = std::max(s, (f.apply(p) - p).norm());
  return s;
}

Mat finite_difference_jacobian(const FiberMap& f, const Vec& x, double step) {
  const int c = f.dimension();
  Mat j(c, c);
  for (int k = 0; k < c; ++k) {
    Vec e = Vec::Zero(c);
    e(k) = step;
    j.col(k) = (f.apply(x + e) - f.apply(x - e)) / (2.0 * step);
  }
  return j;
}

}  // namespace blenderlab
