#include <limits>

#include "sglab/error.hpp"
#include "sglab/transport.hpp"

namespace sglab {

double capacitated_transport_cost(const std::vector<Point>& sources, const std::vector<Point>& sinks,
                                  const std::vector<int>& capacity) {
  const std::size_t N = sources.size(), k = sinks.size();
  long total = 0;
  for (int c : capacity) total += c;
  if (total != static_cast<long>(N)) throw Error(ErrorCode::InvalidArgument, "capacities must sum to the source count");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> c(N * k);
  for (std::size_t s = 0; s < N; ++s)
    for (std::size_t j = 0; j < k; ++j) c[s * k + j] = norm2(sources[s] - sinks[j]);

  std::vector<std::vector<std::size_t>> members(k);
  std::vector<std::size_t> owner(N, k);
  std::vector<double> pot(k, 0.0);
  // W[a][b]: cheapest rerouting of one unit currently at a towards b.
  std::vector<double> W(k * k, inf);
  std::vector<std::size_t> arg(k * k, N);
  auto refresh = [&](std::size_t a) {
    for (std::size_t b = 0; b < k; ++b) {
      W[a * k + b] = inf;
      arg[a * k + b] = N;
    }
    for (std::size_t s : members[a])
      for (std::size_t b = 0; b < k; ++b) {
        if (b == a) continue;
        const double v = c[s * k + b] - c[s * k + a];
        if (v < W[a * k + b]) {
          W[a * k + b] = v;
          arg[a * k + b] = s;
        }
      }
  };
  auto move = [&](std::size_t s, std::size_t to) {
    if (owner[s] < k) {
      auto& m = members[owner[s]];
      for (std::size_t i = 0; i < m.size(); ++i)
        if (m[i] == s) {
          m[i] = m.back();
          m.pop_back();
          break;
        }
    }
    owner[s] = to;
    members[to].push_back(s);
  };

  std::vector<double> dist(k);
  std::vector<std::size_t> prev(k);
  std::vector<char> done(k);
  std::vector<char> touched(k);
  for (std::size_t s = 0; s < N; ++s) {
    for (std::size_t j = 0; j < k; ++j) {
      dist[j] = c[s * k + j] - pot[j];
      prev[j] = k;
      done[j] = 0;
    }
    for (std::size_t round = 0; round < k; ++round) {
      std::size_t a = k;
      for (std::size_t j = 0; j < k; ++j)
        if (!done[j] && (a == k || dist[j] < dist[a])) a = j;
      done[a] = 1;
      if (members[a].empty()) continue;
      for (std::size_t b = 0; b < k; ++b) {
        if (done[b] || arg[a * k + b] == N) continue;
        const double nd = dist[a] + W[a * k + b] + pot[a] - pot[b];
        if (nd < dist[b]) {
          dist[b] = nd;
          prev[b] = a;
        }
      }
    }
    std::size_t t = k;
    for (std::size_t j = 0; j < k; ++j) {
      if (static_cast<int>(members[j].size()) >= capacity[j]) continue;
      if (t == k || dist[j] + pot[j] < dist[t] + pot[t]) t = j;
    }
    std::fill(touched.begin(), touched.end(), 0);
    while (prev[t] != k) {
      const std::size_t a = prev[t];
      move(arg[a * k + t], t);
      touched[a] = touched[t] = 1;
      t = a;
    }
    move(s, t);
    touched[t] = 1;
    for (std::size_t j = 0; j < k; ++j) pot[j] += dist[j];
    for (std::size_t j = 0; j < k; ++j)
      if (touched[j]) refresh(j);
  }
  double sum = 0.0;
  for (std::size_t s = 0; s < N; ++s) sum += c[s * k + owner[s]];
  return sum / static_cast<double>(N);
}

}  // namespace sglab
