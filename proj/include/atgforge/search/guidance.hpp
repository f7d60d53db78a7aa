#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace atgforge {

inline constexpr int kFeatureDim = 16;
inline constexpr int kPolicySlots = 16;

using Features = Eigen::Matrix<double, kFeatureDim, 1>;

/// Goal tokens hashed into 16 buckets, scaled to unit norm (zero if no tokens).
Features goal_features(const std::vector<std::string>& goals);

struct GuidanceSample {
  Features features;
  double target = 0.0;              // +1 proved path, -1 failed node
  std::optional<int> chosen_slot;   // candidate rank of the tactic taken
};

/// Critic 16 -> 16 -> 1 with tanh on both layers; policy 16 -> 16 -> 16 slot
/// logits with a tanh hidden layer.
class GuidanceModel {
 public:
  explicit GuidanceModel(std::uint64_t seed = 0);

  double value(const Features& x) const;
  double value(const std::vector<std::string>& goals) const { return value(goal_features(goals)); }

  /// Softmax over the first `n` slots (n ≤ 16; extra candidates get the mass
  /// of slot 15 split evenly).
  std::vector<double> priors(const Features& x, std::size_t n) const;
  std::vector<double> logits(const Features& x) const;

  /// One epoch of plain SGD over `samples` in order.
  void train(const std::vector<GuidanceSample>& samples, double learning_rate = 1e-2);

  // Flattened parameter access for checks and persistence.
  std::vector<double> critic_parameters() const;
  void set_critic_parameters(const std::vector<double>& p);
  std::vector<double> policy_parameters() const;
  void set_policy_parameters(const std::vector<double>& p);

  double critic_loss(const Features& x, double target) const;
  std::vector<double> critic_gradient(const Features& x, double target) const;
  double policy_loss(const Features& x, int slot) const;
  std::vector<double> policy_gradient(const Features& x, int slot) const;

  void save(const std::filesystem::path& path) const;
  static GuidanceModel load(const std::filesystem::path& path);

  friend bool operator==(const GuidanceModel& a, const GuidanceModel& b);

 private:
  using Square = Eigen::Matrix<double, kFeatureDim, kFeatureDim>;
  using Vec = Eigen::Matrix<double, kFeatureDim, 1>;

  Square w1_;
  Vec b1_;
  Vec w2_;
  double b2_ = 0.0;

  Square u1_;
  Vec c1_;
  Eigen::Matrix<double, kPolicySlots, kFeatureDim> u2_;
  Eigen::Matrix<double, kPolicySlots, 1> c2_;
};

}  // namespace atgforge
