#include "vismap/dataset_io.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include <json.hpp>

namespace vismap {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::uint32_t read_u32_le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u32_le(std::string& out, std::uint32_t v) {
    for (int shift = 0; shift < 32; shift += 8) {
        out.push_back(static_cast<char>((v >> shift) & 0xFFu));
    }
}

std::string read_file(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw BundleError(BundleErrc::io, "cannot open " + file.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

[[noreturn]] void manifest_error(BundleErrc code, const fs::path& file, std::size_t line,
                                 const std::string& msg) {
    throw BundleError(code, file.string() + ":" + std::to_string(line) + ": " + msg);
}

Frame parse_frame(const json& j, const fs::path& file, std::size_t line) {
    auto bad = [&](const std::string& msg) {
        manifest_error(BundleErrc::malformed_manifest, file, line, msg);
    };
    if (!j.is_object()) {
        bad("expected a JSON object");
    }
    Frame f;
    if (!j.contains("id") || !j["id"].is_string()) bad("missing string key 'id'");
    f.id = j["id"].get<std::string>();
    if (!j.contains("index") || !j["index"].is_number_unsigned()) bad("missing unsigned key 'index'");
    f.index = j["index"].get<std::size_t>();

    const bool has_route = j.contains("route_m");
    const bool has_xy = j.contains("pos_xy_m");
    if (has_route == has_xy) bad("exactly one of 'route_m' and 'pos_xy_m' is required");
    if (has_route) {
        if (!j["route_m"].is_number()) bad("'route_m' must be a number");
        f.position = j["route_m"].get<double>();
    } else {
        const auto& xy = j["pos_xy_m"];
        if (!xy.is_array() || xy.size() != 2 || !xy[0].is_number() || !xy[1].is_number()) {
            bad("'pos_xy_m' must be [x, y]");
        }
        f.position = PlanarPoint{xy[0].get<double>(), xy[1].get<double>()};
    }

    if (j.contains("timestamp_s") && !j["timestamp_s"].is_null()) {
        if (!j["timestamp_s"].is_number()) bad("'timestamp_s' must be a number or null");
        f.timestamp_s = j["timestamp_s"].get<double>();
    }
    if (!j.contains("label") || !j["label"].is_string()) bad("missing string key 'label'");
    f.label = j["label"].get<std::string>();
    if (j.contains("memorability") && !j["memorability"].is_null()) {
        if (!j["memorability"].is_number()) bad("'memorability' must be a number or null");
        f.memorability = j["memorability"].get<double>();
    }
    return f;
}

} // namespace

DescriptorMatrix read_descriptor_file(const fs::path& file) {
    const std::string bytes = read_file(file);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    if (bytes.size() < kBundleHeaderBytes) {
        throw BundleError(BundleErrc::truncated, file.string() + ": header truncated at offset " +
                                                     std::to_string(bytes.size()));
    }
    if (!std::equal(std::begin(kBundleMagic), std::end(kBundleMagic), bytes.begin())) {
        throw BundleError(BundleErrc::bad_magic, file.string() + ": bad magic at offset 0");
    }
    const std::uint32_t version = read_u32_le(p + 4);
    if (version != kBundleVersion) {
        throw BundleError(BundleErrc::bad_version, file.string() + ": bad version " +
                                                       std::to_string(version) + " at offset 4");
    }
    const std::uint64_t count = read_u32_le(p + 8);
    const std::uint64_t dim = read_u32_le(p + 12);
    const std::uint64_t expected = kBundleHeaderBytes + count * dim * sizeof(float);
    if (bytes.size() != expected) {
        throw BundleError(BundleErrc::truncated,
                          file.string() + ": payload is " + std::to_string(bytes.size()) +
                              " bytes, header implies " + std::to_string(expected));
    }
    if (count > 0 && dim == 0) {
        throw BundleError(BundleErrc::malformed_manifest, file.string() + ": dim 0 at offset 12");
    }
    std::vector<float> values(count * dim);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const std::size_t offset = kBundleHeaderBytes + i * sizeof(float);
        values[i] = std::bit_cast<float>(read_u32_le(p + offset));
        if (!std::isfinite(values[i])) {
            throw BundleError(BundleErrc::non_finite_descriptor,
                              file.string() + ": non-finite value at offset " +
                                  std::to_string(offset));
        }
    }
    return DescriptorMatrix(count, dim, std::move(values));
}

void write_descriptor_file(const DescriptorMatrix& m, const fs::path& file) {
    std::string out;
    out.reserve(kBundleHeaderBytes + m.values().size() * sizeof(float));
    out.append(kBundleMagic, sizeof(kBundleMagic));
    put_u32_le(out, kBundleVersion);
    put_u32_le(out, static_cast<std::uint32_t>(m.count()));
    put_u32_le(out, static_cast<std::uint32_t>(m.dim()));
    for (float v : m.values()) {
        put_u32_le(out, std::bit_cast<std::uint32_t>(v));
    }
    std::ofstream os(file, std::ios::binary | std::ios::trunc);
    if (!os || !os.write(out.data(), static_cast<std::streamsize>(out.size()))) {
        throw BundleError(BundleErrc::io, "cannot write " + file.string());
    }
}

Traversal load_traversal(const fs::path& dir) {
    const fs::path manifest = dir / kManifestFile;
    const fs::path binary = dir / kDescriptorFile;
    if (!fs::is_directory(dir)) {
        throw BundleError(BundleErrc::io, "bundle directory not found: " + dir.string());
    }

    Traversal t;
    t.name = fs::absolute(dir).lexically_normal().filename().string();
    if (t.name.empty()) {
        t.name = fs::absolute(dir).lexically_normal().parent_path().filename().string();
    }
    t.descriptors = read_descriptor_file(binary);

    std::ifstream in(manifest);
    if (!in) {
        throw BundleError(BundleErrc::io, "cannot open " + manifest.string());
    }
    std::string text;
    std::size_t line_no = 0;
    std::set<std::string> ids;
    while (std::getline(in, text)) {
        ++line_no;
        if (text.empty() || text == "\r") {
            continue;
        }
        json j;
        try {
            j = json::parse(text);
        } catch (const json::parse_error& e) {
            manifest_error(BundleErrc::malformed_manifest, manifest, line_no, e.what());
        }
        Frame f = parse_frame(j, manifest, line_no);
        const std::size_t i = t.frames.size();
        if (f.index != i) {
            manifest_error(BundleErrc::index_mismatch, manifest, line_no,
                           "index " + std::to_string(f.index) + ", expected " + std::to_string(i));
        }
        if (!ids.insert(f.id).second) {
            manifest_error(BundleErrc::malformed_manifest, manifest, line_no,
                           "duplicate id '" + f.id + "'");
        }
        if (i > 0) {
            const Position& prev = t.frames.back().position;
            if (prev.index() != f.position.index()) {
                manifest_error(BundleErrc::mixed_position_kinds, manifest, line_no,
                               "mixes route_m and pos_xy_m");
            }
            if (const auto* r = std::get_if<double>(&f.position); r && *r < std::get<double>(prev)) {
                manifest_error(BundleErrc::non_monotonic_route, manifest, line_no,
                               "route_m decreases");
            }
        }
        if (f.memorability && !(*f.memorability >= 0.0 && *f.memorability <= 1.0)) {
            manifest_error(BundleErrc::memorability_out_of_range, manifest, line_no,
                           "memorability outside [0,1]");
        }
        t.frames.push_back(std::move(f));
    }

    if (t.frames.size() != t.descriptors.count()) {
        throw BundleError(BundleErrc::count_mismatch,
                          dir.string() + ": count mismatch: manifest has " +
                              std::to_string(t.frames.size()) + " frames, binary header count " +
                              std::to_string(t.descriptors.count()));
    }
    if (t.frames.empty()) {
        throw BundleError(BundleErrc::empty_traversal, dir.string() + ": empty traversal rejected");
    }
    return t;
}

void write_traversal(const Traversal& t, const fs::path& dir) {
    if (t.frames.empty()) {
        throw BundleError(BundleErrc::empty_traversal, "empty traversal rejected");
    }
    try {
        t.validate();
    } catch (const Error& e) {
        throw BundleError(BundleErrc::malformed_manifest, e.what());
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw BundleError(BundleErrc::io, "cannot create " + dir.string() + ": " + ec.message());
    }

    std::ostringstream manifest;
    for (const Frame& f : t.frames) {
        json j;
        j["id"] = f.id;
        j["index"] = f.index;
        if (const auto* r = std::get_if<double>(&f.position)) {
            j["route_m"] = *r;
        } else {
            const auto& p = std::get<PlanarPoint>(f.position);
            j["pos_xy_m"] = {p.x, p.y};
        }
        j["timestamp_s"] = f.timestamp_s ? json(*f.timestamp_s) : json(nullptr);
        j["label"] = f.label;
        j["memorability"] = f.memorability ? json(*f.memorability) : json(nullptr);
        manifest << j.dump() << '\n';
    }
    const fs::path manifest_path = dir / kManifestFile;
    std::ofstream os(manifest_path, std::ios::binary | std::ios::trunc);
    const std::string text = manifest.str();
    if (!os || !os.write(text.data(), static_cast<std::streamsize>(text.size()))) {
        throw BundleError(BundleErrc::io, "cannot write " + manifest_path.string());
    }
    write_descriptor_file(t.descriptors, dir / kDescriptorFile);
}

} // namespace vismap
