#pragma once

#include "tofdepth/core.hpp"
#include "tofdepth/png_io.hpp"

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace tofdepth {

class DatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct FrameIndexEntry {
    double timestamp = 0.0;
    std::string path;
};

struct AssociatedFrame {
    double rgb_timestamp = 0.0;
    double depth_timestamp = 0.0;
    GrayImage image;
    /// Measured depth. The pipeline treats it as ground truth and only
    /// hands it to the estimator when the TOF camera fires.
    std::optional<DepthMap> depth;
};

/// Camera and association settings read from a `key = value` file.
struct DatasetConfig {
    Intrinsics intrinsics;
    double max_time_diff = 0.02;
    bool has_image_size = false;
};

/// Parses `timestamp path` lines; `#` starts a comment. Timestamps must be
/// non-decreasing.
inline std::vector<FrameIndexEntry> parse_frame_index(std::istream& in, const std::string& name = "index") {
    std::vector<FrameIndexEntry> entries;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        FrameIndexEntry e;
        if (!(ls >> e.timestamp)) {
            std::string rest;
            std::istringstream probe(line);
            if (probe >> rest) throw DatasetError(name + ":" + std::to_string(lineno) + ": malformed timestamp");
            continue;
        }
        if (!(ls >> e.path)) throw DatasetError(name + ":" + std::to_string(lineno) + ": missing path");
        if (!entries.empty() && e.timestamp < entries.back().timestamp)
            throw DatasetError(name + ":" + std::to_string(lineno) + ": timestamps decrease");
        entries.push_back(std::move(e));
    }
    return entries;
}

inline std::vector<FrameIndexEntry> read_frame_index(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DatasetError("cannot read index file " + path.string());
    return parse_frame_index(in, path.string());
}

/// Greedy association in rgb timestamp order: each rgb frame takes the
/// nearest still-unmatched depth frame within max_time_diff, otherwise it
/// is dropped. Returns (rgb index, depth index) pairs.
inline std::vector<std::pair<std::size_t, std::size_t>> associate(const std::vector<FrameIndexEntry>& rgb,
                                                                  const std::vector<FrameIndexEntry>& depth,
                                                                  double max_time_diff) {
    std::vector<bool> used(depth.size(), false);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < rgb.size(); ++i) {
        std::size_t best = depth.size();
        double best_gap = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < depth.size(); ++j) {
            if (used[j]) continue;
            const double gap = std::abs(rgb[i].timestamp - depth[j].timestamp);
            if (gap < best_gap) {
                best_gap = gap;
                best = j;
            }
        }
        if (best < depth.size() && best_gap <= max_time_diff) {
            used[best] = true;
            pairs.emplace_back(i, best);
        }
    }
    return pairs;
}

/// Reads fx, fy, cx, cy, depth_scale and optionally width, height and
/// max_time_diff. Unknown keys are rejected.
inline DatasetConfig parse_config(std::istream& in, const std::string& name = "config") {
    DatasetConfig cfg;
    std::map<std::string, double> values;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        if (eq == std::string::npos) {
            if (!trim(line).empty()) throw DatasetError(name + ":" + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        std::size_t used = 0;
        double number = 0.0;
        try {
            number = std::stod(val, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != val.size())
            throw DatasetError(name + ":" + std::to_string(lineno) + ": value for '" + key + "' is not a number");
        values[key] = number;
    }
    for (const auto& [key, v] : values) {
        if (key == "fx") cfg.intrinsics.fx = v;
        else if (key == "fy") cfg.intrinsics.fy = v;
        else if (key == "cx") cfg.intrinsics.cx = v;
        else if (key == "cy") cfg.intrinsics.cy = v;
        else if (key == "depth_scale") cfg.intrinsics.depth_scale = v;
        else if (key == "max_time_diff") cfg.max_time_diff = v;
        else if (key == "width") cfg.intrinsics.width = static_cast<int>(v);
        else if (key == "height") cfg.intrinsics.height = static_cast<int>(v);
        else throw DatasetError(name + ": unknown key '" + key + "'");
    }
    for (const char* required : {"fx", "fy", "cx", "cy", "depth_scale"})
        if (!values.contains(required)) throw DatasetError(name + ": missing key '" + required + "'");
    cfg.has_image_size = values.contains("width") && values.contains("height");
    if (!(cfg.max_time_diff >= 0.0)) throw DatasetError(name + ": max_time_diff must be non-negative");
    return cfg;
}

inline DatasetConfig read_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DatasetError("cannot read config file " + path.string());
    return parse_config(in, path.string());
}

inline GrayImage load_gray_image(const std::filesystem::path& path) {
    try {
        return decode_gray_png(read_file_bytes(path));
    } catch (const ImageError& e) {
        throw DatasetError(path.string() + ": " + e.what());
    }
}

inline DepthMap load_depth_image(const std::filesystem::path& path, double depth_scale) {
    try {
        return decode_depth_png(read_file_bytes(path), depth_scale);
    } catch (const ImageError& e) {
        throw DatasetError(path.string() + ": " + e.what());
    }
}

/// Loads up to `limit` associated frames from a directory holding `rgb.txt`
/// and `depth.txt`. Images must match the intrinsics' size.
inline std::vector<AssociatedFrame> load_sequence(const std::filesystem::path& root, const Intrinsics& k,
                                                  double max_time_diff, std::size_t limit) {
    if (!std::filesystem::is_directory(root)) throw DatasetError("dataset directory not found: " + root.string());
    const auto rgb = read_frame_index(root / "rgb.txt");
    const auto depth = read_frame_index(root / "depth.txt");
    const auto pairs = associate(rgb, depth, max_time_diff);

    std::vector<AssociatedFrame> frames;
    for (const auto& [ri, di] : pairs) {
        if (frames.size() >= limit) break;
        AssociatedFrame f;
        f.rgb_timestamp = rgb[ri].timestamp;
        f.depth_timestamp = depth[di].timestamp;
        const auto image_path = root / rgb[ri].path;
        const auto depth_path = root / depth[di].path;
        f.image = load_gray_image(image_path);
        f.depth = load_depth_image(depth_path, k.depth_scale);
        if (!f.image.same_size(k.width, k.height))
            throw DatasetError(image_path.string() + ": image size does not match intrinsics");
        if (!f.depth->same_size(k.width, k.height))
            throw DatasetError(depth_path.string() + ": depth size does not match intrinsics");
        frames.push_back(std::move(f));
    }
    if (frames.empty()) throw DatasetError("no associated frames in " + root.string());
    return frames;
}

}  // namespace tofdepth
