#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scobul/core.hpp"
#include "scobul/eval.hpp"
#include "scobul/network.hpp"
#include "scobul/optimize.hpp"
#include "scobul/siggen.hpp"

namespace scobul {

/// Text event file, one event per line:
///
///   scobul-events 1
///   channels=<n>
///   duration=<steps>
///   <t>,<source>
///   ...
///
/// Writing is canonical: write -> read -> write is byte-identical.
void write_event_stream(const std::string& path, const EventStream& stream);
EventStream read_event_stream(const std::string& path);

/// Text trajectory file: header then "t,x,y,vx,vy" per step. Doubles are
/// rendered shortest-round-trip, so the round trip is byte-exact.
void write_trajectory(const std::string& path, const Trajectory& trajectory);
Trajectory read_trajectory(const std::string& path);

/// Text activation-interval file: header then "cluster,begin,end" rows.
void write_intervals(const std::string& path, const GroundTruthLog& truth);
GroundTruthLog read_intervals(const std::string& path);

/// FNV-1a 64 content hash, hex-encoded; fingerprints run inputs.
std::uint64_t content_hash_bytes(const std::string& bytes);
std::uint64_t content_hash_file(const std::string& path);
std::string hash_hex(std::uint64_t h);

/// JSON network snapshot: per-neuron scalars plus per-synapse
/// [source, kind, resource, weight] rows. Resource shifts are settled first.
void write_snapshot(const std::string& path, Network& network);

/// GA history file with provenance header:
///
///   # scobul-history 1
///   # arm=<scobul|stdp>
///   # signal=<hex hash>
///   generation,best,mean,worst
void write_history(const std::string& path, const GaResult& result,
                   const std::string& arm, const std::string& signal_hash);

struct HistoryFile {
  std::string arm;
  std::string signal_hash;
  std::vector<GenerationStats> rows;
};

HistoryFile read_history(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace scobul
