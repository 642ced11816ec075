#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "tim/objectives.hpp"

namespace tim {

/// Uniform sample of `link_count` distinct directed off-diagonal pairs out of
/// the K(K-1) possible ones. Deterministic per seed.
NetworkTopology gen_topology(int K, int link_count, std::uint64_t seed);

/// Canonical text form: header "K link_count", then one "i j" pair per line,
/// 1-indexed, sorted. write -> read -> write round-trips byte-identically.
std::string format_topology(const NetworkTopology& topo);
void write_topology(const NetworkTopology& topo, const std::string& path);

NetworkTopology parse_topology(std::istream& in);
NetworkTopology read_topology(const std::string& path);

}  // namespace tim
