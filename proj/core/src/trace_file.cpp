#include "herald/trace_file.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <string>

#include "herald/errors.hpp"

namespace herald {
namespace {

constexpr char kMagic[4] = {'H', 'T', 'R', 'C'};

template <typename T>
void put_le(char*& p, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(U); ++i) *p++ = static_cast<char>((bits >> (8 * i)) & 0xFFu);
}

template <typename T>
T get_le(const char*& p) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) bits |= static_cast<U>(static_cast<unsigned char>(*p++)) << (8 * i);
  return std::bit_cast<T>(bits);
}

std::size_t record_bytes(std::uint32_t n_samples) { return 16 + 4 * static_cast<std::size_t>(n_samples); }

void encode_header(char* p, const TraceFileHeader& h) {
  std::memcpy(p, kMagic, 4);
  p += 4;
  put_le(p, kTraceFileVersion);
  put_le(p, h.n_traces);
  put_le(p, h.n_samples);
  put_le(p, h.dt);
  put_le(p, h.flags);
}

}  // namespace

TraceWriter::TraceWriter(const std::filesystem::path& path, std::uint32_t n_samples, double dt, std::uint32_t flags)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw IoError("cannot open trace file for writing: " + path.string());
  if (n_samples == 0 || !(dt > 0.0)) throw std::invalid_argument("trace file needs n_samples > 0 and dt > 0");
  header_ = TraceFileHeader{0, n_samples, dt, flags};
  char raw[kTraceHeaderBytes];
  encode_header(raw, header_);
  out_.write(raw, sizeof raw);
  buffer_.resize(record_bytes(n_samples));
  if (!out_) throw IoError("failed writing trace header: " + path.string());
}

TraceWriter::~TraceWriter() {
  try {
    close();
  } catch (...) {
  }
}

void TraceWriter::write(const TimeTrace& trace) {
  if (!out_.is_open()) throw IoError("trace file already closed: " + path_.string());
  if (trace.samples.size() != header_.n_samples) {
    throw std::invalid_argument("trace has " + std::to_string(trace.samples.size()) + " samples, file expects " +
                                std::to_string(header_.n_samples));
  }
  if (trace.dt != header_.dt) throw std::invalid_argument("trace sample period differs from the file's");
  char* p = buffer_.data();
  put_le(p, trace.herald_id);
  put_le(p, trace.theta);
  for (double s : trace.samples) put_le(p, static_cast<float>(s));
  out_.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
  if (!out_) throw IoError("failed writing trace record: " + path_.string());
  ++count_;
}

void TraceWriter::close() {
  if (!out_.is_open()) return;
  header_.n_traces = count_;
  char raw[kTraceHeaderBytes];
  encode_header(raw, header_);
  out_.seekp(0);
  out_.write(raw, sizeof raw);
  out_.close();
  if (!out_) throw IoError("failed finalizing trace file: " + path_.string());
}

TraceReader::TraceReader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
  if (!in_) throw IoError("cannot open trace file: " + path.string());
  char raw[kTraceHeaderBytes];
  in_.read(raw, sizeof raw);
  if (in_.gcount() != static_cast<std::streamsize>(sizeof raw)) throw FormatError("truncated trace header: " + path.string());
  if (std::memcmp(raw, kMagic, 4) != 0) throw FormatError("not a trace file (bad magic): " + path.string());
  const char* p = raw + 4;
  const auto version = get_le<std::uint32_t>(p);
  if (version != kTraceFileVersion) {
    throw FormatError("unsupported trace file version " + std::to_string(version) + ": " + path.string());
  }
  header_.n_traces = get_le<std::uint64_t>(p);
  header_.n_samples = get_le<std::uint32_t>(p);
  header_.dt = get_le<double>(p);
  header_.flags = get_le<std::uint32_t>(p);
  if (header_.n_samples == 0 || !(header_.dt > 0.0) || !std::isfinite(header_.dt)) {
    throw FormatError("invalid trace header fields: " + path.string());
  }
  buffer_.resize(record_bytes(header_.n_samples));
}

bool TraceReader::next(TimeTrace& out) {
  if (read_ >= header_.n_traces) return false;
  in_.read(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
  if (in_.gcount() != static_cast<std::streamsize>(buffer_.size())) {
    throw FormatError("trace file ends after " + std::to_string(read_) + " of " + std::to_string(header_.n_traces) +
                      " traces: " + path_.string());
  }
  const char* p = buffer_.data();
  out.herald_id = get_le<std::uint64_t>(p);
  out.theta = get_le<double>(p);
  out.dt = header_.dt;
  out.samples.resize(header_.n_samples);
  for (double& s : out.samples) s = get_le<float>(p);
  ++read_;
  return true;
}

void TraceReader::rewind() {
  in_.clear();
  in_.seekg(static_cast<std::streamoff>(kTraceHeaderBytes));
  read_ = 0;
}

void write_trace_file(const std::filesystem::path& path, std::span<const TimeTrace> traces, std::uint32_t flags) {
  if (traces.empty()) throw std::invalid_argument("write_trace_file needs at least one trace to fix the layout");
  TraceWriter writer(path, static_cast<std::uint32_t>(traces.front().samples.size()), traces.front().dt, flags);
  for (const TimeTrace& t : traces) writer.write(t);
  writer.close();
}

std::vector<TimeTrace> read_trace_file(const std::filesystem::path& path, TraceFileHeader* header) {
  TraceReader reader(path);
  std::vector<TimeTrace> traces(reader.header().n_traces);
  for (TimeTrace& t : traces) reader.next(t);
  if (header != nullptr) *header = reader.header();
  return traces;
}

}  // namespace herald
