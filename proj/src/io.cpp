#include "scobul/io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "scobul/errors.hpp"

namespace scobul {

namespace {

std::string fmt(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

double parse_num(const std::string& path, std::string_view token) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  if (ec != std::errc() || ptr != token.data() + token.size())
    throw FormatError(path + ": bad number '" + std::string(token) + "'");
  return out;
}

std::int64_t parse_i64(const std::string& path, std::string_view token) {
  std::int64_t out = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  if (ec != std::errc() || ptr != token.data() + token.size())
    throw FormatError(path + ": bad integer '" + std::string(token) + "'");
  return out;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == sep) {
      parts.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return parts;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

void expect_header(const std::string& path, std::istream& in, const std::string& magic) {
  std::string line;
  if (!std::getline(in, line) || line != magic)
    throw FormatError(path + ": expected header '" + magic + "'");
}

std::int64_t header_field(const std::string& path, std::istream& in,
                          const std::string& name) {
  std::string line;
  if (!std::getline(in, line) || line.rfind(name + "=", 0) != 0)
    throw FormatError(path + ": expected '" + name + "=<value>'");
  return parse_i64(path, std::string_view(line).substr(name.size() + 1));
}

}  // namespace

void write_event_stream(const std::string& path, const EventStream& stream) {
  auto out = open_out(path);
  out << "scobul-events 1\n";
  out << "channels=" << stream.n_channels << "\n";
  out << "duration=" << stream.duration << "\n";
  for (const auto& ev : stream.events) out << ev.t << "," << ev.source << "\n";
  if (!out) throw IoError("write failed: '" + path + "'");
}

EventStream read_event_stream(const std::string& path) {
  auto in = open_in(path);
  expect_header(path, in, "scobul-events 1");
  EventStream stream;
  stream.n_channels = static_cast<std::uint32_t>(header_field(path, in, "channels"));
  stream.duration = header_field(path, in, "duration");
  std::string line;
  while (std::getline(in, line)) {
    const auto parts = split(line, ',');
    if (parts.size() != 2) throw FormatError(path + ": bad event line '" + line + "'");
    stream.events.push_back(
        {parse_i64(path, parts[0]),
         static_cast<std::uint32_t>(parse_i64(path, parts[1]))});
  }
  return stream;
}

void write_trajectory(const std::string& path, const Trajectory& trajectory) {
  auto out = open_out(path);
  out << "scobul-trajectory 1\n";
  out << "steps=" << trajectory.size() << "\n";
  for (std::size_t t = 0; t < trajectory.size(); ++t) {
    const auto& p = trajectory[t];
    out << t << "," << fmt(p.x) << "," << fmt(p.y) << "," << fmt(p.vx) << ","
        << fmt(p.vy) << "\n";
  }
  if (!out) throw IoError("write failed: '" + path + "'");
}

Trajectory read_trajectory(const std::string& path) {
  auto in = open_in(path);
  expect_header(path, in, "scobul-trajectory 1");
  const auto steps = header_field(path, in, "steps");
  Trajectory trajectory;
  trajectory.reserve(static_cast<std::size_t>(steps));
  std::string line;
  while (std::getline(in, line)) {
    const auto parts = split(line, ',');
    if (parts.size() != 5) throw FormatError(path + ": bad trajectory line '" + line + "'");
    if (parse_i64(path, parts[0]) != static_cast<std::int64_t>(trajectory.size()))
      throw FormatError(path + ": trajectory steps out of order");
    trajectory.push_back({parse_num(path, parts[1]), parse_num(path, parts[2]),
                          parse_num(path, parts[3]), parse_num(path, parts[4])});
  }
  if (static_cast<std::int64_t>(trajectory.size()) != steps)
    throw FormatError(path + ": trajectory row count does not match header");
  return trajectory;
}

void write_intervals(const std::string& path, const GroundTruthLog& truth) {
  auto out = open_out(path);
  out << "scobul-intervals 1\n";
  out << "clusters=" << truth.intervals.size() << "\n";
  for (std::size_t c = 0; c < truth.intervals.size(); ++c)
    for (const auto& iv : truth.intervals[c])
      out << c << "," << iv.begin << "," << iv.end << "\n";
  if (!out) throw IoError("write failed: '" + path + "'");
}

GroundTruthLog read_intervals(const std::string& path) {
  auto in = open_in(path);
  expect_header(path, in, "scobul-intervals 1");
  const auto n = header_field(path, in, "clusters");
  GroundTruthLog truth;
  truth.intervals.resize(static_cast<std::size_t>(n));
  std::string line;
  while (std::getline(in, line)) {
    const auto parts = split(line, ',');
    if (parts.size() != 3) throw FormatError(path + ": bad interval line '" + line + "'");
    const auto c = parse_i64(path, parts[0]);
    if (c < 0 || c >= n) throw FormatError(path + ": cluster index out of range");
    truth.intervals[static_cast<std::size_t>(c)].push_back(
        {parse_i64(path, parts[1]), parse_i64(path, parts[2])});
  }
  return truth;
}

std::uint64_t content_hash_bytes(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t content_hash_file(const std::string& path) {
  return content_hash_bytes(read_text_file(path));
}

std::string hash_hex(std::uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

void write_snapshot(const std::string& path, Network& network) {
  network.settle();
  nlohmann::ordered_json doc;
  doc["schema"] = "scobul-snapshot/1";
  doc["arm"] = network.arm() == PlasticityArm::Scobul ? "scobul" : "stdp";
  doc["n_inputs"] = network.config().n_inputs;
  auto& neurons = doc["neurons"] = nlohmann::ordered_json::array();
  for (const auto& n : network.neurons()) {
    nlohmann::ordered_json jn;
    jn["threshold"] = n.threshold;
    jn["leak_factor"] = n.leak_factor;
    jn["refractory_len"] = n.refractory_len;
    jn["initial_resource_total"] = n.initial_resource_total;
    auto& syns = jn["synapses"] = nlohmann::ordered_json::array();
    for (const auto& s : n.synapses) {
      syns.push_back({s.source,
                      s.kind == SynapseKind::ExcitatoryPlastic ? "plastic" : "inhibitory",
                      s.resource, s.weight});
    }
    neurons.push_back(std::move(jn));
  }
  write_text_file(path, doc.dump(2) + "\n");
}

void write_history(const std::string& path, const GaResult& result,
                   const std::string& arm, const std::string& signal_hash) {
  auto out = open_out(path);
  out << "# scobul-history 1\n";
  out << "# arm=" << arm << "\n";
  out << "# signal=" << signal_hash << "\n";
  out << "generation,best,mean,worst\n";
  for (const auto& row : result.history)
    out << row.generation << "," << fmt(row.best) << "," << fmt(row.mean) << ","
        << fmt(row.worst) << "\n";
  if (!out) throw IoError("write failed: '" + path + "'");
}

HistoryFile read_history(const std::string& path) {
  auto in = open_in(path);
  expect_header(path, in, "# scobul-history 1");
  HistoryFile file;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# arm=", 0) != 0)
    throw FormatError(path + ": expected '# arm=...'");
  file.arm = line.substr(6);
  if (!std::getline(in, line) || line.rfind("# signal=", 0) != 0)
    throw FormatError(path + ": expected '# signal=...'");
  file.signal_hash = line.substr(9);
  if (!std::getline(in, line) || line != "generation,best,mean,worst")
    throw FormatError(path + ": expected the column header");
  while (std::getline(in, line)) {
    const auto parts = split(line, ',');
    if (parts.size() != 4) throw FormatError(path + ": bad history row '" + line + "'");
    GenerationStats row;
    row.generation = static_cast<std::uint32_t>(parse_i64(path, parts[0]));
    row.best = parse_num(path, parts[1]);
    row.mean = parse_num(path, parts[2]);
    row.worst = parse_num(path, parts[3]);
    file.rows.push_back(row);
  }
  return file;
}

std::string read_text_file(const std::string& path) {
  auto in = open_in(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!out) throw IoError("write failed: '" + path + "'");
}

}  // namespace scobul
