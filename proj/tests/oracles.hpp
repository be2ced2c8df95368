#pragma once

// Deliberately naive reference implementations. They share no code with the
// library and favour obviousness over speed.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

using Words = std::vector<std::string>;
using Rows = std::vector<std::vector<double>>;

// ASCII-only rule: every byte that is not a letter or digit separates tokens.
inline Words ascii_tokenize(const std::string& s) {
  Words out;
  std::string cur;
  for (unsigned char ch : s) {
    if (std::isalnum(ch)) {
      cur += static_cast<char>(std::tolower(ch));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline std::map<std::string, int> counts(const Words& w) {
  std::map<std::string, int> c;
  for (const auto& t : w) c[t]++;
  return c;
}

inline int clipped(const Words& gen, const Words& ref) {
  auto cg = counts(gen);
  auto cr = counts(ref);
  int total = 0;
  for (auto& [word, n] : cg) {
    if (cr.count(word)) total += std::min(n, cr[word]);
  }
  return total;
}

inline double bleu1(const Words& gen, const Words& ref) {
  if (gen.empty()) return 0.0;
  double p1 = double(clipped(gen, ref)) / double(gen.size());
  if (p1 == 0.0) return 0.0;
  double c = double(gen.size()), r = double(ref.size());
  double bp = (c > r) ? 1.0 : std::exp(1.0 - r / c);
  return bp * std::exp(std::log(p1));
}

inline double rouge1(const Words& gen, const Words& ref) {
  return double(clipped(gen, ref)) / double(ref.size());
}

// Every one-to-one exact alignment is enumerated; keep the largest match
// count and, among those, the fewest chunks.
struct MeteorSearch {
  const Words& gen;
  const Words& ref;
  std::vector<int> to_ref;
  std::vector<bool> used;
  int best_m = 0;
  int best_ch = 0;

  MeteorSearch(const Words& g, const Words& r) : gen(g), ref(r), to_ref(g.size(), -1), used(r.size()) {}

  void record() {
    int m = 0, ch = 0, prev = -2;
    for (size_t i = 0; i < gen.size(); ++i) {
      if (to_ref[i] < 0) {
        prev = -2;
        continue;
      }
      ++m;
      if (to_ref[i] != prev + 1) ++ch;
      prev = to_ref[i];
    }
    if (m > best_m || (m == best_m && ch < best_ch)) {
      best_m = m;
      best_ch = ch;
    }
  }

  void go(size_t i) {
    if (i == gen.size()) {
      record();
      return;
    }
    to_ref[i] = -1;
    go(i + 1);
    for (size_t j = 0; j < ref.size(); ++j) {
      if (!used[j] && ref[j] == gen[i]) {
        used[j] = true;
        to_ref[i] = int(j);
        go(i + 1);
        used[j] = false;
        to_ref[i] = -1;
      }
    }
  }
};

inline std::pair<int, int> meteor_alignment(const Words& gen, const Words& ref) {
  MeteorSearch s(gen, ref);
  s.go(0);
  return {s.best_m, s.best_ch};
}

inline double meteor(const Words& gen, const Words& ref, double gamma = 0.5, double theta = 3.0) {
  auto [m, ch] = meteor_alignment(gen, ref);
  if (m == 0) return 0.0;
  double P = double(m) / gen.size(), R = double(m) / ref.size();
  double fmean = 10 * P * R / (R + 9 * P);
  return fmean * (1 - gamma * std::pow(double(ch) / m, theta));
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0, aa = 0, bb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / (std::sqrt(aa) * std::sqrt(bb));
}

inline double bertscore_p(const Rows& x, const Rows& y) {
  double total = 0;
  for (auto& xi : x) {
    double best = -2;
    for (auto& yj : y) best = std::max(best, cosine(xi, yj));
    total += best;
  }
  return total / x.size();
}

inline double maxsim(const Rows& q, const Rows& d) {
  double total = 0;
  for (auto& qi : q) {
    double best = -2;
    for (auto& dj : d) best = std::max(best, cosine(qi, dj));
    total += best;
  }
  return total;
}

// Recomputes every statistic from the raw documents on each call.
inline double bm25(const std::map<std::string, Words>& docs, const Words& query,
                   const std::string& doc, double k1 = 1.5, double b = 0.75) {
  double N = double(docs.size());
  double total_len = 0;
  for (auto& [id, toks] : docs) total_len += toks.size();
  double avgdl = total_len / N;
  const Words& d = docs.at(doc);
  double score = 0;
  for (auto& t : query) {
    double df = 0;
    for (auto& [id, toks] : docs) {
      if (std::find(toks.begin(), toks.end(), t) != toks.end()) df += 1;
    }
    double tf = double(std::count(d.begin(), d.end(), t));
    double idf = std::log(1 + (N - df + 0.5) / (df + 0.5));
    score += idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * d.size() / avgdl));
  }
  return score;
}

struct Hit {
  std::string id;
  double distance;
};

inline std::vector<Hit> full_scan(const std::vector<std::pair<std::string, std::vector<float>>>& data,
                                  const std::vector<float>& q) {
  std::vector<Hit> all;
  for (auto& [id, v] : data) {
    double s = 0;
    for (size_t i = 0; i < v.size(); ++i) {
      double diff = double(q[i]) - double(v[i]);
      s += diff * diff;
    }
    all.push_back({id, s});
  }
  std::sort(all.begin(), all.end(), [](const Hit& a, const Hit& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.id < b.id);
  });
  return all;
}

// Sort by score descending, then id ascending.
inline std::vector<std::string> order_by_score(std::vector<std::pair<std::string, double>> scored,
                                               size_t n) {
  std::sort(scored.begin(), scored.end(), [](auto& a, auto& b) {
    return a.second > b.second || (a.second == b.second && a.first < b.first);
  });
  std::vector<std::string> ids;
  for (size_t i = 0; i < scored.size() && i < n; ++i) ids.push_back(scored[i].first);
  return ids;
}

}  // namespace oracle
