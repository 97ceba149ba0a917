#include <array>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "splatstyle/gaussian_cloud.hpp"

namespace splatstyle {

namespace {

constexpr std::array<const char*, 14> kProperties = {
    "x",       "y",       "z",       "opacity", "scale_0", "scale_1", "scale_2",
    "rot_0",   "rot_1",   "rot_2",   "rot_3",   "f_dc_0",  "f_dc_1",  "f_dc_2"};

float f32(double v) { return static_cast<float>(v); }

void put_f32(std::ostream& os, float v) {
  // host is little-endian; written byte order is the wire order
  os.write(reinterpret_cast<const char*>(&v), sizeof(float));
}

}  // namespace

void save_ply(const GaussianCloud& cloud, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("save_ply: cannot open " + path.string());

  os << "ply\n"
     << "format binary_little_endian 1.0\n"
     << "element vertex " << cloud.size() << "\n";
  for (const char* p : kProperties) os << "property float " << p << "\n";
  os << "end_header\n";

  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    put_f32(os, f32(cloud.means(i, 0)));
    put_f32(os, f32(cloud.means(i, 1)));
    put_f32(os, f32(cloud.means(i, 2)));
    put_f32(os, f32(cloud.opacity_logits(i)));
    for (int k = 0; k < 3; ++k) put_f32(os, f32(cloud.log_scales(i, k)));
    for (int k = 0; k < 4; ++k) put_f32(os, f32(cloud.rotations(i, k)));
    for (int k = 0; k < 3; ++k) put_f32(os, f32(cloud.colors(i, k)));
  }
  if (!os) throw IoError("save_ply: write failed for " + path.string());
}

GaussianCloud load_ply(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("load_ply: cannot open " + path.string());

  std::string line;
  if (!std::getline(is, line)) throw FormatError("load_ply: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "ply") throw FormatError("load_ply: missing ply magic");

  Eigen::Index vertex_count = -1;
  bool in_vertex_element = false;
  bool format_seen = false;
  // property name -> float offset within one record, in declaration order
  std::vector<std::string> file_props;

  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == "end_header") break;
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok == "comment") continue;
    if (tok == "format") {
      std::string fmt, ver;
      ls >> fmt >> ver;
      if (fmt != "binary_little_endian")
        throw FormatError("load_ply: unsupported format " + fmt);
      format_seen = true;
    } else if (tok == "element") {
      std::string name;
      Eigen::Index count = 0;
      ls >> name >> count;
      in_vertex_element = (name == "vertex");
      if (in_vertex_element) vertex_count = count;
    } else if (tok == "property") {
      if (!in_vertex_element) continue;
      std::string type, name;
      ls >> type >> name;
      if (type != "float" && type != "float32")
        throw FormatError("load_ply: property " + name + " has unsupported type " + type);
      file_props.push_back(name);
    }
  }
  if (!format_seen) throw FormatError("load_ply: missing format line");
  if (vertex_count < 0) throw FormatError("load_ply: missing element vertex");

  std::array<int, kProperties.size()> offsets;
  for (size_t k = 0; k < kProperties.size(); ++k) {
    auto it = std::find(file_props.begin(), file_props.end(), kProperties[k]);
    if (it == file_props.end())
      throw FormatError(std::string("load_ply: missing property ") + kProperties[k]);
    offsets[k] = static_cast<int>(it - file_props.begin());
  }

  const size_t record_floats = file_props.size();
  std::vector<float> record(record_floats);
  GaussianCloud cloud = GaussianCloud::zeros(vertex_count);
  for (Eigen::Index i = 0; i < vertex_count; ++i) {
    is.read(reinterpret_cast<char*>(record.data()),
            static_cast<std::streamsize>(record_floats * sizeof(float)));
    if (!is) throw FormatError("load_ply: truncated payload at vertex " + std::to_string(i));
    int k = 0;
    for (int c = 0; c < 3; ++c) cloud.means(i, c) = record[offsets[k++]];
    cloud.opacity_logits(i) = record[offsets[k++]];
    for (int c = 0; c < 3; ++c) cloud.log_scales(i, c) = record[offsets[k++]];
    for (int c = 0; c < 4; ++c) cloud.rotations(i, c) = record[offsets[k++]];
    for (int c = 0; c < 3; ++c) cloud.colors(i, c) = record[offsets[k++]];
  }
  return cloud;
}

}  // namespace splatstyle
