#include "hiertask/vectorizer.hpp"

#include <cmath>

namespace hiertask {

std::uint64_t fnv1a64(std::string_view data) noexcept {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char raw : text) {
    char c = raw;
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
      cur.push_back(c);
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

double FeatureVector::l2_norm() const {
  double sum = 0.0;
  for (const auto& [d, w] : entries) sum += w * w;
  return std::sqrt(sum);
}

namespace {

void accumulate(std::map<std::uint32_t, double>& counts, std::string_view salt,
                std::string_view text, std::uint32_t dim) {
  for (const auto& tok : tokenize(text)) {
    std::string salted;
    salted.reserve(salt.size() + tok.size());
    salted.append(salt);
    salted.append(tok);
    const auto d = static_cast<std::uint32_t>(fnv1a64(salted) % dim);
    counts[d] += 1.0;
  }
}

}  // namespace

FeatureVector embed(std::string_view description,
                    std::span<const std::string> keywords,
                    std::string_view context, std::uint32_t dim) {
  FeatureVector v;
  v.dim = dim;
  accumulate(v.entries, "d:", description, dim);
  for (const auto& kw : keywords) accumulate(v.entries, "k:", kw, dim);
  accumulate(v.entries, "c:", context, dim);
  if (v.entries.empty()) return v;

  double sum = 0.0;
  for (const auto& [d, tf] : v.entries) sum += tf * tf;
  const double norm = std::sqrt(sum);
  for (auto& [d, tf] : v.entries) tf /= norm;
  return v;
}

}  // namespace hiertask
