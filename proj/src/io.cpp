#include "nakano/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

namespace nakano {

static_assert(std::endian::native == std::endian::little,
              "field files are little-endian; this build targets LE hosts");

namespace {

using json = nlohmann::ordered_json;

constexpr const char* kOrder =
    "row-major, last axis fastest, matrix entries row-major innermost";

void write_raw(const std::string& path, const std::string& kind, const GridSpec& grid,
               std::span<const double> payload) {
  json header;
  header["kind"] = kind;
  header["n"] = grid.dim();
  header["r"] = grid.rank();
  header["mins"] = grid.mins();
  header["maxs"] = grid.maxs();
  header["points"] = grid.points();
  header["dtype"] = "f64";
  header["order"] = kOrder;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << header.dump() << '\n';
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(double)));
  if (!out) throw IoError("short write to '" + path + "'");
}

struct RawField {
  GridSpec grid;
  std::vector<double> payload;
};

std::size_t payload_count(const std::string& kind, const GridSpec& grid) {
  const std::size_t N = grid.node_count(), r = grid.rank(), n = grid.dim();
  if (kind == "scalar") return N;
  if (kind == "section") return N * r;
  if (kind == "matrix") return N * r * r;
  if (kind == "oneform") return n * N * r;
  if (kind == "curvature") return N * n * n * r * r;
  throw IoError("unknown field kind '" + kind + "'");
}

RawField read_raw(const std::string& path, const std::string& expected_kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::string line;
  if (!std::getline(in, line)) throw IoError("missing header line in '" + path + "'");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw IoError("malformed header in '" + path + "': " + e.what());
  }

  const auto need = [&](const char* key) {
    if (!header.contains(key)) throw IoError("header of '" + path + "' lacks '" + key + "'");
    return header[key];
  };
  const std::string kind = need("kind").get<std::string>();
  if (kind != expected_kind)
    throw IoError("'" + path + "' holds a '" + kind + "' field, expected '" +
                  expected_kind + "'");
  if (need("dtype").get<std::string>() != "f64")
    throw IoError("'" + path + "': unsupported dtype");
  if (need("order").get<std::string>() != kOrder)
    throw IoError("'" + path + "': unsupported storage order");

  GridSpec grid(need("mins").get<std::vector<double>>(),
                need("maxs").get<std::vector<double>>(),
                need("points").get<std::vector<std::size_t>>(),
                need("r").get<std::size_t>());
  if (need("n").get<std::size_t>() != grid.dim())
    throw IoError("'" + path + "': header n does not match mins/maxs/points");

  const std::size_t count = payload_count(kind, grid);
  std::vector<double> payload(count);
  in.read(reinterpret_cast<char*>(payload.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (static_cast<std::size_t>(in.gcount()) != count * sizeof(double))
    throw IoError("'" + path + "': payload shorter than header promises");
  char extra;
  if (in.read(&extra, 1))
    throw IoError("'" + path + "': payload longer than header promises");
  return RawField{std::move(grid), std::move(payload)};
}

}  // namespace

void write_field(const std::string& path, const ScalarField& f) {
  write_raw(path, "scalar", f.grid(), f.values());
}

void write_field(const std::string& path, const SectionField& f) {
  write_raw(path, "section", f.grid(), f.values());
}

void write_field(const std::string& path, const MatrixField& f) {
  write_raw(path, "matrix", f.grid(), f.values());
}

void write_field(const std::string& path, const OneForm& f) {
  std::vector<double> payload;
  payload.reserve(f.size() * f.grid().node_count() * f.grid().rank());
  for (std::size_t i = 0; i < f.size(); ++i) {
    auto v = f.component(i).values();
    payload.insert(payload.end(), v.begin(), v.end());
  }
  write_raw(path, "oneform", f.grid(), payload);
}

ScalarField read_scalar_field(const std::string& path) {
  RawField raw = read_raw(path, "scalar");
  return ScalarField(raw.grid, std::move(raw.payload));
}

SectionField read_section_field(const std::string& path) {
  RawField raw = read_raw(path, "section");
  return SectionField(raw.grid, std::move(raw.payload));
}

MatrixField read_matrix_field(const std::string& path) {
  RawField raw = read_raw(path, "matrix");
  return MatrixField(raw.grid, std::move(raw.payload));
}

OneForm read_one_form(const std::string& path) {
  RawField raw = read_raw(path, "oneform");
  const std::size_t per = raw.grid.node_count() * raw.grid.rank();
  std::vector<SectionField> comps;
  comps.reserve(raw.grid.dim());
  for (std::size_t i = 0; i < raw.grid.dim(); ++i)
    comps.emplace_back(raw.grid, std::vector<double>(raw.payload.begin() + i * per,
                                                     raw.payload.begin() + (i + 1) * per));
  return OneForm(raw.grid, std::move(comps));
}

std::string peek_field_kind(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::string line;
  if (!std::getline(in, line)) throw IoError("missing header line in '" + path + "'");
  try {
    return json::parse(line).at("kind").get<std::string>();
  } catch (const json::exception& e) {
    throw IoError("malformed header in '" + path + "': " + e.what());
  }
}

}  // namespace nakano
