#pragma once

// Binary trace container, little-endian throughout:
//
//   header  "HTRC" | version u32 | n_traces u64 | n_samples u32 | dt f64 | flags u32
//   trace   herald_id u64 | theta f64 | samples f32[n_samples]

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <vector>

#include "herald/trace.hpp"

namespace herald {

inline constexpr std::uint32_t kTraceFileVersion = 1;
inline constexpr std::size_t kTraceHeaderBytes = 32;

enum TraceFlags : std::uint32_t {
  kTraceFlagNone = 0,
  kTraceFlagVacuumReference = 1u << 0,
};

struct TraceFileHeader {
  std::uint64_t n_traces = 0;
  std::uint32_t n_samples = 0;
  double dt = 0.0;
  std::uint32_t flags = kTraceFlagNone;
};

/// Streams traces to disk. The trace count in the header is patched on
/// close(); the destructor closes if the caller did not.
class TraceWriter {
 public:
  TraceWriter(const std::filesystem::path& path, std::uint32_t n_samples, double dt,
              std::uint32_t flags = kTraceFlagNone);
  TraceWriter(const TraceWriter&) = delete;
  TraceWriter& operator=(const TraceWriter&) = delete;
  ~TraceWriter();

  void write(const TimeTrace& trace);
  void close();
  std::uint64_t count() const { return count_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  TraceFileHeader header_;
  std::uint64_t count_ = 0;
  std::vector<char> buffer_;
};

class TraceReader {
 public:
  explicit TraceReader(const std::filesystem::path& path);

  const TraceFileHeader& header() const { return header_; }
  /// Reads the next trace into out; false at end of file.
  bool next(TimeTrace& out);
  /// Seeks back to the first trace.
  void rewind();

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  TraceFileHeader header_;
  std::uint64_t read_ = 0;
  std::vector<char> buffer_;
};

void write_trace_file(const std::filesystem::path& path, std::span<const TimeTrace> traces,
                      std::uint32_t flags = kTraceFlagNone);
std::vector<TimeTrace> read_trace_file(const std::filesystem::path& path, TraceFileHeader* header = nullptr);

}  // namespace herald
