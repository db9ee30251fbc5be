// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

#include "svf/formats.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "svf/errors.hpp"

namespace svf {

namespace {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}
    template <typename T>
    void put(T value) {
        out_.write(reinterpret_cast<const char*>(&value), sizeof(T));
    }
    void bytes(const void* data, std::size_t n) { out_.write(static_cast<const char*>(data), std::streamsize(n)); }
    void check() const {
        if (!out_) throw DataError("write failed");
    }

private:
    std::ostream& out_;
};

class Reader {
public:
    Reader(std::istream& in, const char* what) : in_(in), what_(what) {}
    template <typename T>
    T get() {
        T value;
        bytes(&value, sizeof(T));
        return value;
    }
    void bytes(void* data, std::size_t n) {
        in_.read(static_cast<char*>(data), std::streamsize(n));
        if (static_cast<std::size_t>(in_.gcount()) != n) throw DataError(std::string(what_) + ": truncated input");
    }
    void magic(const char (&expected)[5]) {
        char m[4];
        bytes(m, 4);
        if (std::memcmp(m, expected, 4) != 0) throw DataError(std::string(what_) + ": bad magic");
        const auto version = get<std::uint32_t>();
        if (version != 1) throw DataError(std::string(what_) + ": unsupported version " + std::to_string(version));
    }

private:
    std::istream& in_;
    const char* what_;
};

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    return in;
}

void put_bounds(Writer& w, const Aabb& b) {
    for (int i = 0; i < 3; ++i) w.put<double>(b.min[i]);
    for (int i = 0; i < 3; ++i) w.put<double>(b.max[i]);
}

Aabb get_bounds(Reader& r) {
    Aabb b;
    for (int i = 0; i < 3; ++i) b.min[i] = r.get<double>();
    for (int i = 0; i < 3; ++i) b.max[i] = r.get<double>();
    return b;
}

template <typename F>
auto with_context(const std::filesystem::path& path, F&& f) {
    try {
        return f();
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    } catch (const DomainError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

}  // namespace

void write_grid(std::ostream& out, const SparseVoxelGrid& grid) {
    Writer w(out);
    w.bytes("LESV", 4);
    w.put<std::uint32_t>(1);
    put_bounds(w, grid.bounds());
    w.put<std::uint64_t>(grid.size());
    w.put<std::uint32_t>(static_cast<std::uint32_t>(grid.feature_dim()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(grid.sh_degree()));
    std::vector<std::size_t> order(grid.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return grid.key(a) < grid.key(b); });
    for (std::size_t i : order) {
        w.put<std::uint32_t>(grid.key(i).level);
        w.put<std::uint64_t>(grid.key(i).code);
        w.bytes(grid.density(i).data(), 8 * sizeof(float));
        w.bytes(grid.sh(i).data(), grid.sh(i).size_bytes());
        if (grid.feature_dim() > 0) {
            w.put<float>(grid.weight_sum(i));
            w.bytes(grid.feature(i).data(), grid.feature(i).size_bytes());
        }
    }
    w.check();
}

SparseVoxelGrid read_grid(std::istream& in) {
    Reader r(in, "grid");
    r.magic("LESV");
    const Aabb bounds = get_bounds(r);
    const auto count = r.get<std::uint64_t>();
    const auto dim = r.get<std::uint32_t>();
    const auto degree = r.get<std::uint32_t>();
    if (degree > 3) throw DataError("grid: SH degree out of range");
    SparseVoxelGrid grid(bounds, static_cast<int>(degree));
    grid.allocate_features(dim);
    std::vector<float> sh(grid.sh_stride());
    std::vector<float> feature(dim);
    for (std::uint64_t n = 0; n < count; ++n) {
        VoxelKey key;
        key.level = r.get<std::uint32_t>();
        key.code = r.get<std::uint64_t>();
        CornerDensities density;
        r.bytes(density.data(), sizeof(density));
        r.bytes(sh.data(), sh.size() * sizeof(float));
        const std::size_t i = grid.insert(key, density, sh);
        if (dim > 0) {
            grid.set_weight_sum(i, r.get<float>());
            r.bytes(feature.data(), feature.size() * sizeof(float));
            std::copy(feature.begin(), feature.end(), grid.feature(i).begin());
        }
    }
    return grid;
}

void save_grid(const std::filesystem::path& path, const SparseVoxelGrid& grid) {
    auto out = open_out(path);
    write_grid(out, grid);
}

SparseVoxelGrid load_grid(const std::filesystem::path& path) {
    return with_context(path, [&] {
        auto in = open_in(path);
        return read_grid(in);
    });
}

void write_image(std::ostream& out, const ImagePlane& image) {
    Writer w(out);
    w.bytes("LIMG", 4);
    w.put<std::uint32_t>(1);
    w.put<std::uint32_t>(0);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(image.channels()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(image.width()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(image.height()));
    w.bytes(image.values().data(), image.values().size_bytes());
    std::vector<std::uint8_t> bits((image.pixel_count() + 7) / 8, 0);
    for (std::size_t p = 0; p < image.pixel_count(); ++p) {
        if (image.valid(p)) bits[p / 8] |= std::uint8_t(1u << (p % 8));
    }
    w.bytes(bits.data(), bits.size());
    w.check();
}

ImagePlane read_image(std::istream& in) {
    Reader r(in, "image");
    r.magic("LIMG");
    if (r.get<std::uint32_t>() != 0) throw DataError("image: unsupported dtype");
    const auto channels = r.get<std::uint32_t>();
    const auto width = r.get<std::uint32_t>();
    const auto height = r.get<std::uint32_t>();
    if (channels == 0 || channels > 65536 || width > 1u << 16 || height > 1u << 16) throw DataError("image: bad shape");
    ImagePlane image{int(width), int(height), int(channels)};
    std::vector<float> values(std::size_t(width) * height * channels);
    r.bytes(values.data(), values.size() * sizeof(float));
    std::vector<std::uint8_t> bits((std::size_t(width) * height + 7) / 8);
    r.bytes(bits.data(), bits.size());
    for (std::uint32_t y = 0; y < height; ++y) {
        for (std::uint32_t x = 0; x < width; ++x) {
            const std::size_t p = std::size_t(y) * width + x;
            if (bits[p / 8] >> (p % 8) & 1) {
                image.set(int(x), int(y), std::span<const float>(values.data() + p * channels, channels));
            }
        }
    }
    // Keep invalid-pixel payload bits as stored.
    std::copy(values.begin(), values.end(), image.values().begin());
    return image;
}

void save_image(const std::filesystem::path& path, const ImagePlane& image) {
    auto out = open_out(path);
    write_image(out, image);
}

ImagePlane load_image(const std::filesystem::path& path) {
    return with_context(path, [&] {
        auto in = open_in(path);
        return read_image(in);
    });
}

void write_tsdf(std::ostream& out, const TsdfField& field) {
    Writer w(out);
    w.bytes("LTSD", 4);
    w.put<std::uint32_t>(1);
    put_bounds(w, field.bounds());
    w.put<std::uint32_t>(field.level());
    w.put<double>(field.trunc());
    w.put<std::uint64_t>(field.observed_count());
    field.for_each_observed([&](const CornerCoord& c, const TsdfSample& s) {
        w.put<std::int32_t>(c.x);
        w.put<std::int32_t>(c.y);
        w.put<std::int32_t>(c.z);
        w.put<float>(s.phi);
        w.put<float>(s.weight);
    });
    w.check();
}

TsdfField read_tsdf(std::istream& in) {
    Reader r(in, "tsdf");
    r.magic("LTSD");
    const Aabb bounds = get_bounds(r);
    const auto level = r.get<std::uint32_t>();
    const auto trunc = r.get<double>();
    TsdfField field(bounds, level, trunc);
    const auto count = r.get<std::uint64_t>();
    for (std::uint64_t i = 0; i < count; ++i) {
        CornerCoord c;
        c.x = r.get<std::int32_t>();
        c.y = r.get<std::int32_t>();
        c.z = r.get<std::int32_t>();
        TsdfSample s;
        s.phi = r.get<float>();
        s.weight = r.get<float>();
        field.set(c, s);
    }
    return field;
}

void save_tsdf(const std::filesystem::path& path, const TsdfField& field) {
    auto out = open_out(path);
    write_tsdf(out, field);
}

TsdfField load_tsdf(const std::filesystem::path& path) {
    return with_context(path, [&] {
        auto in = open_in(path);
        return read_tsdf(in);
    });
}

void save_embedding(const std::filesystem::path& path, const std::vector<float>& vector) {
    auto out = open_out(path);
    Writer w(out);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(vector.size()));
    w.bytes(vector.data(), vector.size() * sizeof(float));
    w.check();
}

std::vector<float> load_embedding(const std::filesystem::path& path) {
    return with_context(path, [&] {
        auto in = open_in(path);
        Reader r(in, "embedding");
        const auto dim = r.get<std::uint32_t>();
        if (dim == 0 || dim > (1u << 20)) throw DataError("embedding: bad dimension");
        std::vector<float> v(dim);
        r.bytes(v.data(), v.size() * sizeof(float));
        return v;
    });
}

namespace {

std::vector<std::vector<std::string>> read_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream ss(line);
        std::vector<std::string> fields;
        for (std::string f; ss >> f;) fields.push_back(f);
        if (!fields.empty()) rows.push_back(std::move(fields));
    }
    return rows;
}

std::filesystem::path resolve(const std::filesystem::path& manifest, const std::string& entry) {
    const std::filesystem::path p(entry);
    return p.is_absolute() ? p : manifest.parent_path() / p;
}

}  // namespace

std::vector<QueryEmbedding> load_embedding_manifest(const std::filesystem::path& path) {
    std::vector<QueryEmbedding> out;
    std::size_t line = 0;
    for (const auto& row : read_table(path)) {
        ++line;
        if (row.size() < 2) throw DataError(path.string() + ": row " + std::to_string(line) + " needs 'label path'");
        std::string label = row[0];
        for (std::size_t i = 1; i + 1 < row.size(); ++i) label += ' ' + row[i];
        out.push_back({label, load_embedding(resolve(path, row.back()))});
        if (out.back().vector.size() != out.front().vector.size()) {
            throw DataError(path.string() + ": embedding '" + label + "' dimension differs from '" + out.front().label + "'");
        }
    }
    if (out.empty()) throw DataError(path.string() + ": no embeddings");
    return out;
}

void save_embedding_manifest(const std::filesystem::path& path, const std::vector<QueryEmbedding>& embeddings) {
    auto out = open_out(path);
    out << "# label path\n";
    for (const auto& e : embeddings) {
        std::string file = e.label;
        for (char& c : file)
            if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '.') c = '_';
        file += ".emb";
        save_embedding(path.parent_path() / file, e.vector);
        out << e.label << ' ' << file << '\n';
    }
    if (!out) throw DataError("write failed: " + path.string());
}

std::vector<CropFeature> load_crop_manifest(const std::filesystem::path& path) {
    std::vector<CropFeature> crops;
    std::size_t line = 0;
    for (const auto& row : read_table(path)) {
        ++line;
        if (row.size() != 5) {
            throw DataError(path.string() + ": row " + std::to_string(line) + " needs 'anchor_x anchor_y width height path'");
        }
        CropFeature crop;
        int w = 0, h = 0;
        try {
            crop.anchor_x = std::stoi(row[0]);
            crop.anchor_y = std::stoi(row[1]);
            w = std::stoi(row[2]);
            h = std::stoi(row[3]);
        } catch (const std::exception&) {
            throw DataError(path.string() + ": row " + std::to_string(line) + " has a non-integer field");
        }
        crop.feature = load_image(resolve(path, row[4]));
        if (crop.feature.width() != w || crop.feature.height() != h) {
            throw DataError(path.string() + ": row " + std::to_string(line) + " size does not match " + row[4]);
        }
        crops.push_back(std::move(crop));
    }
    if (crops.empty()) throw DataError(path.string() + ": no crops");
    return crops;
}

void save_voxel_keys(const std::filesystem::path& path, const SparseVoxelGrid& grid,
                     const std::vector<std::size_t>& voxels, const std::string& label) {
    auto out = open_out(path);
    out << "# level code center_x center_y center_z" << (label.empty() ? "" : " label") << '\n';
    out.precision(9);
    for (std::size_t i : voxels) {
        const Vec3 c = grid.center(i);
        out << grid.key(i).level << ' ' << grid.key(i).code << ' ' << c.x() << ' ' << c.y() << ' ' << c.z();
        if (!label.empty()) out << ' ' << label;
        out << '\n';
    }
}

}  // namespace svf
