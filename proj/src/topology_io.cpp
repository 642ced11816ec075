#include "tim/topology_io.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include "tim/errors.hpp"
#include "tim/rng.hpp"

namespace tim {

NetworkTopology gen_topology(int K, int link_count, std::uint64_t seed) {
  if (K < 1) throw ArgumentError("gen_topology: K must be positive");
  const long long max_links = static_cast<long long>(K) * (K - 1);
  if (link_count < 0 || link_count > max_links)
    throw ArgumentError("gen_topology: link_count must lie in [0, K(K-1)]");

  std::vector<std::pair<int, int>> all;
  all.reserve(max_links);
  for (int i = 1; i <= K; ++i)
    for (int j = 1; j <= K; ++j)
      if (i != j) all.emplace_back(i, j);

  // Partial Fisher-Yates: the first link_count slots are a uniform sample
  // without replacement.
  std::mt19937_64 gen(seed);
  for (int t = 0; t < link_count; ++t) {
    std::uniform_int_distribution<std::size_t> pick(t, all.size() - 1);
    std::swap(all[t], all[pick(gen)]);
  }
  all.resize(link_count);
  return NetworkTopology(K, std::move(all));
}

std::string format_topology(const NetworkTopology& topo) {
  std::ostringstream out;
  out << topo.K << ' ' << topo.link_count() << '\n';
  for (const auto& [i, j] : topo.links) out << i << ' ' << j << '\n';
  return out.str();
}

void write_topology(const NetworkTopology& topo, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open for writing: " + path);
  out << format_topology(topo);
  if (!out) throw ParseError("write failed: " + path);
}

NetworkTopology parse_topology(std::istream& in) {
  int K = 0, count = 0;
  if (!(in >> K >> count)) throw ParseError("topology: malformed header, expected 'K link_count'");
  if (K < 1 || count < 0) throw ParseError("topology: invalid header values");
  std::vector<std::pair<int, int>> links;
  links.reserve(count);
  for (int l = 0; l < count; ++l) {
    int i = 0, j = 0;
    if (!(in >> i >> j))
      throw ParseError("topology: expected " + std::to_string(count) + " links, file ends at " +
                       std::to_string(l));
    links.emplace_back(i, j);
  }
  std::string trailing;
  if (in >> trailing) throw ParseError("topology: trailing content after links");
  try {
    return NetworkTopology(K, std::move(links));
  } catch (const ArgumentError& e) {
    throw ParseError(std::string("topology: ") + e.what());
  }
}

NetworkTopology read_topology(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open: " + path);
  return parse_topology(in);
}

}  // namespace tim
