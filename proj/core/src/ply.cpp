// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

#include "svf/ply.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "svf/errors.hpp"

namespace svf {

namespace {

enum class Scalar { i8, u8, i16, u16, i32, u32, f32, f64 };

Scalar parse_scalar(const std::string& s) {
    if (s == "char" || s == "int8") return Scalar::i8;
    if (s == "uchar" || s == "uint8") return Scalar::u8;
    if (s == "short" || s == "int16") return Scalar::i16;
    if (s == "ushort" || s == "uint16") return Scalar::u16;
    if (s == "int" || s == "int32") return Scalar::i32;
    if (s == "uint" || s == "uint32") return Scalar::u32;
    if (s == "float" || s == "float32") return Scalar::f32;
    if (s == "double" || s == "float64") return Scalar::f64;
    throw DataError("ply: unknown scalar type '" + s + "'");
}

template <typename T>
double read_as(std::istream& in) {
    T v;
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    return static_cast<double>(v);
}

double read_binary(std::istream& in, Scalar t) {
    switch (t) {
        case Scalar::i8: return read_as<std::int8_t>(in);
        case Scalar::u8: return read_as<std::uint8_t>(in);
        case Scalar::i16: return read_as<std::int16_t>(in);
        case Scalar::u16: return read_as<std::uint16_t>(in);
        case Scalar::i32: return read_as<std::int32_t>(in);
        case Scalar::u32: return read_as<std::uint32_t>(in);
        case Scalar::f32: return read_as<float>(in);
        case Scalar::f64: return read_as<double>(in);
    }
    return 0.0;
}

struct Property {
    std::string name;
    Scalar type = Scalar::f32;
    bool list = false;
    Scalar count_type = Scalar::u8;
};

struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<Property> properties;
};

template <typename T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    return out;
}

}  // namespace

void write_ply(const std::filesystem::path& path, const TriangleMesh& mesh, bool binary) {
    const bool normals = mesh.normals.size() == mesh.vertices.size() && !mesh.vertices.empty();
    auto out = open_out(path);
    out << "ply\nformat " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n";
    out << "element vertex " << mesh.vertices.size() << "\n";
    out << "property float x\nproperty float y\nproperty float z\n";
    if (normals) out << "property float nx\nproperty float ny\nproperty float nz\n";
    out << "element face " << mesh.triangles.size() << "\n";
    out << "property list uchar int vertex_indices\nend_header\n";
    out.precision(9);
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        const Vec3& v = mesh.vertices[i];
        if (binary) {
            for (int a = 0; a < 3; ++a) put<float>(out, float(v[a]));
            if (normals) {
                for (int a = 0; a < 3; ++a) put<float>(out, float(mesh.normals[i][a]));
            }
        } else {
            out << float(v.x()) << ' ' << float(v.y()) << ' ' << float(v.z());
            if (normals) {
                out << ' ' << float(mesh.normals[i].x()) << ' ' << float(mesh.normals[i].y()) << ' '
                    << float(mesh.normals[i].z());
            }
            out << '\n';
        }
    }
    for (const auto& t : mesh.triangles) {
        if (binary) {
            put<std::uint8_t>(out, 3);
            for (auto idx : t) put<std::int32_t>(out, std::int32_t(idx));
        } else {
            out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
        }
    }
    if (!out) throw DataError("write failed: " + path.string());
}

void write_ply(const std::filesystem::path& path, const PointCloud& cloud, bool binary) {
    const bool labels = !cloud.labels.empty();
    if (labels && cloud.labels.size() != cloud.points.size()) throw DataError("ply: label count differs from point count");
    auto out = open_out(path);
    out << "ply\nformat " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n";
    out << "element vertex " << cloud.points.size() << "\n";
    out << "property float x\nproperty float y\nproperty float z\n";
    if (labels) out << "property int label\n";
    out << "end_header\n";
    out.precision(9);
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        const Vec3& p = cloud.points[i];
        if (binary) {
            for (int a = 0; a < 3; ++a) put<float>(out, float(p[a]));
            if (labels) put<std::int32_t>(out, cloud.labels[i]);
        } else {
            out << float(p.x()) << ' ' << float(p.y()) << ' ' << float(p.z());
            if (labels) out << ' ' << cloud.labels[i];
            out << '\n';
        }
    }
    if (!out) throw DataError("write failed: " + path.string());
}

PlyData read_ply(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    const auto fail = [&](const std::string& msg) { return DataError(path.string() + ": " + msg); };

    std::string line;
    std::getline(in, line);
    if (line != "ply" && line != "ply\r") throw fail("not a PLY file");
    bool binary = false;
    std::vector<Element> elements;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ss(line);
        std::string word;
        ss >> word;
        if (word == "end_header") break;
        if (word == "format") {
            std::string fmt;
            ss >> fmt;
            if (fmt == "binary_little_endian") binary = true;
            else if (fmt != "ascii") throw fail("unsupported format " + fmt);
        } else if (word == "element") {
            Element e;
            ss >> e.name >> e.count;
            elements.push_back(e);
        } else if (word == "property") {
            if (elements.empty()) throw fail("property before element");
            Property p;
            std::string type;
            ss >> type;
            if (type == "list") {
                std::string ct, it;
                ss >> ct >> it;
                p.list = true;
                p.count_type = parse_scalar(ct);
                p.type = parse_scalar(it);
            } else {
                p.type = parse_scalar(type);
            }
            ss >> p.name;
            elements.back().properties.push_back(p);
        } else if (word != "comment" && word != "obj_info" && !word.empty()) {
            throw fail("unexpected header line '" + line + "'");
        }
    }
    if (!in) throw fail("truncated header");

    PlyData data;
    std::istringstream text_row;
    std::string row;
    const auto next_value = [&](Scalar t) -> double {
        if (binary) {
            const double v = read_binary(in, t);
            if (!in) throw fail("truncated body");
            return v;
        }
        double v;
        if (!(text_row >> v)) throw fail("malformed ascii row");
        return t == Scalar::f32 ? double(float(v)) : v;
    };

    for (const Element& e : elements) {
        int ix = -1, iy = -1, iz = -1, inx = -1, iny = -1, inz = -1, ilabel = -1, ifaces = -1;
        for (int k = 0; k < int(e.properties.size()); ++k) {
            const std::string& n = e.properties[k].name;
            if (n == "x") ix = k;
            else if (n == "y") iy = k;
            else if (n == "z") iz = k;
            else if (n == "nx") inx = k;
            else if (n == "ny") iny = k;
            else if (n == "nz") inz = k;
            else if (n == "label") ilabel = k;
            else if (n == "vertex_indices" || n == "vertex_index") ifaces = k;
        }
        const bool is_vertex = e.name == "vertex";
        const bool is_face = e.name == "face";
        if (is_vertex && (ix < 0 || iy < 0 || iz < 0)) throw fail("vertex element lacks x/y/z");
        const bool has_normals = inx >= 0 && iny >= 0 && inz >= 0;
        std::vector<double> scalars(e.properties.size());
        std::vector<std::int64_t> list;
        for (std::size_t r = 0; r < e.count; ++r) {
            if (!binary) {
                if (!std::getline(in, row)) throw fail("truncated body");
                text_row.clear();
                text_row.str(row);
            }
            for (int k = 0; k < int(e.properties.size()); ++k) {
                const Property& p = e.properties[k];
                if (p.list) {
                    const auto n = static_cast<std::int64_t>(next_value(p.count_type));
                    if (n < 0 || n > 1024) throw fail("bad list length");
                    list.assign(std::size_t(n), 0);
                    for (auto& v : list) v = static_cast<std::int64_t>(next_value(p.type));
                    if (is_face && k == ifaces) {
                        if (n < 3) throw fail("face with fewer than 3 vertices");
                        for (std::int64_t t = 1; t + 1 < n; ++t) {
                            data.mesh.triangles.push_back({std::uint32_t(list[0]), std::uint32_t(list[t]),
                                                           std::uint32_t(list[t + 1])});
                        }
                    }
                } else {
                    scalars[k] = next_value(p.type);
                }
            }
            if (is_vertex) {
                data.mesh.vertices.emplace_back(scalars[ix], scalars[iy], scalars[iz]);
                if (has_normals) data.mesh.normals.emplace_back(scalars[inx], scalars[iny], scalars[inz]);
                if (ilabel >= 0) data.labels.push_back(static_cast<int>(scalars[ilabel]));
            }
        }
    }
    try {
        data.mesh.validate();
    } catch (const DataError& e) {
        throw fail(e.what());
    }
    return data;
}

}  // namespace svf
