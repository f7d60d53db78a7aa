#include "atgforge/search/guidance.hpp"

#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>

#include "atgforge/core/record.hpp"
#include "atgforge/core/text.hpp"

namespace atgforge {

namespace {

constexpr char kMagic[4] = {'A', 'T', 'G', 'W'};
constexpr std::uint32_t kVersion = 1;

std::vector<std::string> tokens(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (unsigned char ch : text) {
    bool word = std::isalnum(ch) || ch == '_' || ch == '.' || ch >= 0x80;
    if (word) {
      cur += static_cast<char>(ch);
    } else {
      flush();
      if (!std::isspace(ch)) out.emplace_back(1, static_cast<char>(ch));
    }
  }
  flush();
  return out;
}

template <class M>
void append(std::vector<double>& out, const M& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(m(r, c));
  }
}

template <class M>
void take(const std::vector<double>& in, std::size_t& pos, M& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = in.at(pos++);
  }
}

Eigen::VectorXd softmax(const Eigen::VectorXd& z) {
  Eigen::VectorXd e = (z.array() - z.maxCoeff()).exp();
  return e / e.sum();
}

}  // namespace

Features goal_features(const std::vector<std::string>& goals) {
  Features f = Features::Zero();
  for (const auto& g : goals) {
    for (const auto& t : tokens(normalize_text(g))) f(static_cast<int>(fnv1a(t) % kFeatureDim)) += 1.0;
  }
  double n = f.norm();
  if (n > 0) f /= n;
  return f;
}

GuidanceModel::GuidanceModel(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> init(0.0, 1.0 / std::sqrt(static_cast<double>(kFeatureDim)));
  auto fill = [&](auto& m) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = init(rng);
    }
  };
  fill(w1_);
  b1_.setZero();
  w2_.setZero();
  b2_ = 0.0;
  fill(u1_);
  c1_.setZero();
  u2_.setZero();
  c2_.setZero();
}

double GuidanceModel::value(const Features& x) const {
  Vec h = (w1_ * x + b1_).array().tanh();
  return std::tanh(w2_.dot(h) + b2_);
}

std::vector<double> GuidanceModel::logits(const Features& x) const {
  Vec h = (u1_ * x + c1_).array().tanh();
  Eigen::Matrix<double, kPolicySlots, 1> z = u2_ * h + c2_;
  return {z.data(), z.data() + kPolicySlots};
}

std::vector<double> GuidanceModel::priors(const Features& x, std::size_t n) const {
  if (n == 0) return {};
  std::vector<double> z = logits(x);
  std::size_t k = std::min<std::size_t>(n, kPolicySlots);
  Eigen::VectorXd zk(static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) zk(static_cast<Eigen::Index>(i)) = z[i];
  Eigen::VectorXd p = softmax(zk);
  std::vector<double> out(p.data(), p.data() + k);
  if (n > k) {
    double tail = out.back() / static_cast<double>(n - k + 1);
    out.back() = tail;
    out.resize(n, tail);
  }
  return out;
}

double GuidanceModel::critic_loss(const Features& x, double target) const {
  double d = value(x) - target;
  return 0.5 * d * d;
}

std::vector<double> GuidanceModel::critic_gradient(const Features& x, double target) const {
  Vec h = (w1_ * x + b1_).array().tanh();
  double v = std::tanh(w2_.dot(h) + b2_);
  double dz2 = (v - target) * (1.0 - v * v);
  Vec dw2 = dz2 * h;
  Vec dz1 = (dz2 * w2_).array() * (1.0 - h.array().square());
  Square dw1 = dz1 * x.transpose();
  std::vector<double> g;
  append(g, dw1);
  append(g, dz1);
  append(g, dw2);
  g.push_back(dz2);
  return g;
}

double GuidanceModel::policy_loss(const Features& x, int slot) const {
  std::vector<double> z = logits(x);
  Eigen::Map<Eigen::VectorXd> zv(z.data(), kPolicySlots);
  double m = zv.maxCoeff();
  double lse = m + std::log((zv.array() - m).exp().sum());
  return lse - z.at(static_cast<std::size_t>(slot));
}

std::vector<double> GuidanceModel::policy_gradient(const Features& x, int slot) const {
  Vec h = (u1_ * x + c1_).array().tanh();
  Eigen::VectorXd z = u2_ * h + c2_;
  Eigen::VectorXd dz = softmax(z);
  dz(slot) -= 1.0;
  Eigen::Matrix<double, kPolicySlots, kFeatureDim> du2 = dz * h.transpose();
  Vec dh = u2_.transpose() * dz;
  Vec da = dh.array() * (1.0 - h.array().square());
  Square du1 = da * x.transpose();
  std::vector<double> g;
  append(g, du1);
  append(g, da);
  append(g, du2);
  append(g, dz);
  return g;
}

std::vector<double> GuidanceModel::critic_parameters() const {
  std::vector<double> p;
  append(p, w1_);
  append(p, b1_);
  append(p, w2_);
  p.push_back(b2_);
  return p;
}

void GuidanceModel::set_critic_parameters(const std::vector<double>& p) {
  std::size_t pos = 0;
  take(p, pos, w1_);
  take(p, pos, b1_);
  take(p, pos, w2_);
  b2_ = p.at(pos++);
  if (pos != p.size()) throw std::invalid_argument("critic parameter count mismatch");
}

std::vector<double> GuidanceModel::policy_parameters() const {
  std::vector<double> p;
  append(p, u1_);
  append(p, c1_);
  append(p, u2_);
  append(p, c2_);
  return p;
}

void GuidanceModel::set_policy_parameters(const std::vector<double>& p) {
  std::size_t pos = 0;
  take(p, pos, u1_);
  take(p, pos, c1_);
  take(p, pos, u2_);
  take(p, pos, c2_);
  if (pos != p.size()) throw std::invalid_argument("policy parameter count mismatch");
}

void GuidanceModel::train(const std::vector<GuidanceSample>& samples, double learning_rate) {
  for (const auto& s : samples) {
    std::vector<double> cp = critic_parameters();
    std::vector<double> cg = critic_gradient(s.features, s.target);
    for (std::size_t i = 0; i < cp.size(); ++i) cp[i] -= learning_rate * cg[i];
    set_critic_parameters(cp);
    if (s.chosen_slot && *s.chosen_slot >= 0 && *s.chosen_slot < kPolicySlots) {
      std::vector<double> pp = policy_parameters();
      std::vector<double> pg = policy_gradient(s.features, *s.chosen_slot);
      for (std::size_t i = 0; i < pp.size(); ++i) pp[i] -= learning_rate * pg[i];
      set_policy_parameters(pp);
    }
  }
}

void GuidanceModel::save(const std::filesystem::path& path) const {
  std::vector<double> c = critic_parameters();
  std::vector<double> p = policy_parameters();
  std::string bytes(kMagic, sizeof kMagic);
  auto put_u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  };
  put_u32(kVersion);
  put_u32(kFeatureDim);
  put_u32(kPolicySlots);
  put_u32(static_cast<std::uint32_t>(c.size()));
  put_u32(static_cast<std::uint32_t>(p.size()));
  for (const auto* v : {&c, &p}) {
    bytes.append(reinterpret_cast<const char*>(v->data()), v->size() * sizeof(double));
  }
  write_file_atomic(path, bytes);
}

GuidanceModel GuidanceModel::load(const std::filesystem::path& path) {
  std::string bytes = read_file(path);
  std::size_t pos = 0;
  auto need = [&](std::size_t n) {
    if (pos + n > bytes.size()) throw std::runtime_error("truncated guidance weight file " + path.string());
  };
  need(sizeof kMagic);
  if (bytes.compare(0, sizeof kMagic, kMagic, sizeof kMagic) != 0) {
    throw std::runtime_error("not a guidance weight file: " + path.string());
  }
  pos += sizeof kMagic;
  auto get_u32 = [&] {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[pos++])) << (8 * i);
    return v;
  };
  std::uint32_t version = get_u32();
  if (version != kVersion) throw std::runtime_error("unsupported guidance weight version " + std::to_string(version));
  if (get_u32() != kFeatureDim || get_u32() != kPolicySlots) throw std::runtime_error("guidance shape mismatch");
  std::vector<double> c(get_u32());
  std::vector<double> p(get_u32());
  GuidanceModel m;
  for (auto* v : {&c, &p}) {
    need(v->size() * sizeof(double));
    std::memcpy(v->data(), bytes.data() + pos, v->size() * sizeof(double));
    pos += v->size() * sizeof(double);
  }
  m.set_critic_parameters(c);
  m.set_policy_parameters(p);
  return m;
}

bool operator==(const GuidanceModel& a, const GuidanceModel& b) {
  return a.critic_parameters() == b.critic_parameters() && a.policy_parameters() == b.policy_parameters();
}

}  // namespace atgforge
