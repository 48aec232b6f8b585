#ifndef MARGINLAB_DATASET_HPP
#define MARGINLAB_DATASET_HPP

#include <cmath>
#include <cstdint>
#include <cstring>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "marginlab/errors.hpp"

namespace marginlab {

/// Signed sample matrix for binary linear classification: row i holds
/// z_i = y_i * x_i. Immutable after construction; safe to share across
/// threads.
class Dataset {
public:
  Dataset(std::size_t n, std::size_t d, std::vector<double> z_row_major,
          std::optional<std::int64_t> seed = std::nullopt)
      : n_(n), d_(d), z_(std::move(z_row_major)), seed_(seed) {
    if (n_ == 0 || d_ == 0)
      throw InvalidInputError("dataset requires n >= 1 and d >= 1");
    if (z_.size() != n_ * d_)
      throw InvalidInputError("Z storage does not match n*d");
    for (double v : z_)
      if (!std::isfinite(v))
        throw InvalidInputError("dataset entries must be finite");
    b_ = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      double norm1 = 0.0;
      for (std::size_t j = 0; j < d_; ++j) norm1 += std::fabs(z_[i * d_ + j]);
      b_ = std::max(b_, norm1);
    }
  }

  std::size_t n() const { return n_; }
  std::size_t d() const { return d_; }
  /// Largest l1 row norm, the constant B of the margin bounds.
  double max_row_l1() const { return b_; }
  std::optional<std::int64_t> seed() const { return seed_; }

  std::span<const double> row(std::size_t i) const {
    return {z_.data() + i * d_, d_};
  }
  const std::vector<double>& storage() const { return z_; }

  /// FNV-1a over the raw double bits plus the shape; identifies the dataset
  /// in run metadata so mismatched runs cannot be merged.
  std::uint64_t content_hash() const {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    auto mix = [&h](std::uint64_t word) {
      for (int b = 0; b < 8; ++b) {
        h ^= (word >> (8 * b)) & 0xFF;
        h *= 0x100000001B3ULL;
      }
    };
    mix(n_);
    mix(d_);
    for (double v : z_) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, sizeof bits);
      mix(bits);
    }
    return h;
  }

  nlohmann::json to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < n_; ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t j = 0; j < d_; ++j) row.push_back(z_[i * d_ + j]);
      rows.push_back(std::move(row));
    }
    nlohmann::json j;
    j["n"] = n_;
    j["d"] = d_;
    j["Z"] = std::move(rows);
    if (seed_)
      j["seed"] = *seed_;
    else
      j["seed"] = nullptr;
    return j;
  }

  static Dataset from_json(const nlohmann::json& j) {
    const auto n = j.at("n").get<std::size_t>();
    const auto d = j.at("d").get<std::size_t>();
    const auto& rows = j.at("Z");
    if (!rows.is_array() || rows.size() != n)
      throw InvalidInputError("Z must be an array of n rows");
    std::vector<double> z;
    z.reserve(n * d);
    for (const auto& row : rows) {
      if (!row.is_array() || row.size() != d)
        throw InvalidInputError("each Z row must have d entries");
      for (const auto& v : row) z.push_back(v.get<double>());
    }
    std::optional<std::int64_t> seed;
    if (j.contains("seed") && !j.at("seed").is_null())
      seed = j.at("seed").get<std::int64_t>();
    return Dataset(n, d, std::move(z), seed);
  }

private:
  std::size_t n_;
  std::size_t d_;
  std::vector<double> z_;
  double b_ = 0.0;
  std::optional<std::int64_t> seed_;
};

/// Loss family selector.
enum class LossKind { kLogistic, kExponential };

inline std::string to_string(LossKind kind) {
  return kind == LossKind::kLogistic ? "logistic" : "exponential";
}

inline LossKind loss_kind_from_string(const std::string& name) {
  if (name == "logistic") return LossKind::kLogistic;
  if (name == "exponential") return LossKind::kExponential;
  throw InvalidInputError("unknown loss kind: " + name);
}

}  // namespace marginlab

#endif  // MARGINLAB_DATASET_HPP
