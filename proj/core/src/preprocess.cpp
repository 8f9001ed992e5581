#include "ctsynth/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace ctsynth {

void PreprocessParams::validate() const {
    if (bins < 2) throw error(errc::invalid_params, "bins must be >= 2");
    if (!std::isfinite(vmin) || !std::isfinite(vmax) || vmax < vmin)
        throw error(errc::invalid_params, "bad intensity bounds");
    if (constant) return;
    if (static_cast<std::int64_t>(hist_lut.size()) != bins ||
        static_cast<std::int64_t>(inv_lut.size()) != bins)
        throw error(errc::invalid_params, "lut size does not match bins");
    for (std::int64_t i = 0; i < bins; ++i) {
        if (hist_lut[i] < 0.0 || hist_lut[i] > 1.0)
            throw error(errc::invalid_params, "hist_lut value outside [0,1]");
        if (i > 0 && hist_lut[i] < hist_lut[i - 1])
            throw error(errc::invalid_params, "hist_lut is not monotone");
        if (i > 0 && inv_lut[i] < inv_lut[i - 1])
            throw error(errc::invalid_params, "inv_lut is not monotone");
    }
}

std::int64_t PreprocessParams::bin_of(double x) const {
    if (bin_width <= 0.0) return 0;
    auto b = static_cast<std::int64_t>(std::floor((x - vmin) / bin_width));
    return std::clamp<std::int64_t>(b, 0, bins - 1);
}

double PreprocessParams::forward(double x) const {
    if (constant) return 0.0;
    return hist_lut[static_cast<std::size_t>(bin_of(x))];
}

double PreprocessParams::invert(double u) const {
    if (constant) return vmin;
    // First bin whose equalized value reaches u. Occupied bins start their
    // run of equal lut values, so exact table entries come back as the bin
    // they were produced from.
    auto it = std::lower_bound(hist_lut.begin(), hist_lut.end(), u);
    if (it == hist_lut.end()) --it;
    return bin_center(it - hist_lut.begin());
}

std::pair<Volume, PreprocessParams> equalize(const Volume& v, std::int64_t bins) {
    v.validate();
    if (bins < 2) throw error(errc::invalid_params, "bins must be >= 2");

    PreprocessParams p;
    p.bins = bins;
    auto [lo, hi] = v.min_max();
    p.vmin = lo;
    p.vmax = hi;

    if (hi == lo) {
        p.constant = true;
        p.bin_width = 0.0;
        Volume out(v.nx(), v.ny(), v.nz(), 0.0);
        out.spacing = v.spacing;
        return {std::move(out), std::move(p)};
    }

    p.bin_width = (hi - lo) / static_cast<double>(bins);

    std::vector<std::int64_t> hist(static_cast<std::size_t>(bins), 0);
    for (double x : v.data) ++hist[static_cast<std::size_t>(p.bin_of(x))];

    const double total = static_cast<double>(v.voxel_count());
    std::vector<double> cdf(static_cast<std::size_t>(bins), 0.0);
    std::int64_t running = 0;
    for (std::int64_t b = 0; b < bins; ++b) {
        running += hist[static_cast<std::size_t>(b)];
        cdf[static_cast<std::size_t>(b)] = static_cast<double>(running) / total;
    }
    double cdf_min = 1.0;
    for (std::int64_t b = 0; b < bins; ++b) {
        if (hist[static_cast<std::size_t>(b)] > 0) {
            cdf_min = cdf[static_cast<std::size_t>(b)];
            break;
        }
    }

    p.hist_lut.resize(static_cast<std::size_t>(bins));
    for (std::int64_t b = 0; b < bins; ++b) {
        const double e = (cdf[static_cast<std::size_t>(b)] - cdf_min) / (1.0 - cdf_min);
        p.hist_lut[static_cast<std::size_t>(b)] = std::clamp(e, 0.0, 1.0);
    }

    p.inv_lut.resize(static_cast<std::size_t>(bins));
    for (std::int64_t j = 0; j < bins; ++j)
        p.inv_lut[static_cast<std::size_t>(j)] =
            p.invert(static_cast<double>(j) / static_cast<double>(bins - 1));

    Volume out = apply_equalize(v, p);
    return {std::move(out), std::move(p)};
}

Volume apply_equalize(const Volume& v, const PreprocessParams& p) {
    p.validate();
    Volume out(v.nx(), v.ny(), v.nz());
    out.spacing = v.spacing;
    for (std::size_t i = 0; i < v.data.size(); ++i) out.data[i] = p.forward(v.data[i]);
    return out;
}

std::pair<Volume, std::pair<double, double>> normalize(const Volume& v) {
    v.validate();
    auto [lo, hi] = v.min_max();
    Volume out = apply_normalize(v, {lo, hi});
    return {std::move(out), {lo, hi}};
}

Volume apply_normalize(const Volume& v, std::pair<double, double> bounds) {
    const auto [lo, hi] = bounds;
    Volume out(v.nx(), v.ny(), v.nz(), 0.0);
    out.spacing = v.spacing;
    if (hi == lo) return out; // degenerate: all zero, bounds recorded by caller
    const double scale = 2.0 / (hi - lo);
    for (std::size_t i = 0; i < v.data.size(); ++i) out.data[i] = (v.data[i] - lo) * scale - 1.0;
    return out;
}

Volume denormalize_and_unequalize(const Volume& v, const PreprocessParams& p,
                                  std::pair<double, double> bounds) {
    p.validate();
    const auto [lo, hi] = bounds;
    Volume out(v.nx(), v.ny(), v.nz());
    out.spacing = v.spacing;
    for (std::size_t i = 0; i < v.data.size(); ++i) {
        const double x = std::clamp(v.data[i], -1.0, 1.0);
        const double u = hi == lo ? lo : lo + (x + 1.0) * 0.5 * (hi - lo);
        out.data[i] = p.invert(std::clamp(u, 0.0, 1.0));
    }
    return out;
}

Preprocessed preprocess(const Volume& v, std::int64_t bins) {
    Preprocessed r;
    auto [eq, params] = equalize(v, bins);
    auto [norm, bounds] = normalize(eq);
    r.volume = std::move(norm);
    r.params = std::move(params);
    r.bounds = bounds;
    return r;
}

std::string meta_path_for(const std::string& volume_path) {
    const auto dot = volume_path.rfind('.');
    const auto slash = volume_path.find_last_of("/\\");
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return volume_path + ".meta.json";
    return volume_path.substr(0, dot) + ".meta.json";
}

namespace {

using nlohmann::json;

json grid_to_json(const BlockGrid& g) {
    return json{{"parent_dims", g.parent_dims},
                {"padded_dims", g.padded_dims},
                {"edge", g.edge},
                {"pad_value", g.pad_value},
                {"block_count", g.block_count}};
}

BlockGrid grid_from_json(const json& j) {
    BlockGrid g;
    j.at("parent_dims").get_to(g.parent_dims);
    j.at("padded_dims").get_to(g.padded_dims);
    j.at("edge").get_to(g.edge);
    j.at("pad_value").get_to(g.pad_value);
    j.at("block_count").get_to(g.block_count);
    return g;
}

} // namespace

void save_meta(const std::string& path, const SidecarMeta& meta) {
    json j;
    j["format"] = "ctsynth-meta-v1";
    if (meta.preprocess) {
        const auto& p = *meta.preprocess;
        j["preprocess"] = json{{"bins", p.bins},       {"vmin", p.vmin},
                               {"vmax", p.vmax},       {"bin_width", p.bin_width},
                               {"constant", p.constant}, {"hist_lut", p.hist_lut},
                               {"inv_lut", p.inv_lut}};
    }
    if (meta.bounds) j["normalize_bounds"] = {meta.bounds->first, meta.bounds->second};
    if (meta.grid) j["grid"] = grid_to_json(*meta.grid);
    if (meta.phantom_spec_json) j["phantom_spec"] = json::parse(*meta.phantom_spec_json);

    std::ofstream f(path, std::ios::trunc);
    if (!f) throw error(errc::io_failure, "cannot create " + path);
    f << j.dump(2) << "\n";
    if (!f) throw error(errc::io_failure, "write failed for " + path);
}

SidecarMeta load_meta(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw error(errc::io_failure, "cannot open " + path);
    json j;
    try {
        f >> j;
    } catch (const json::parse_error& e) {
        throw error(errc::invalid_params, "bad meta json in " + path + ": " + e.what());
    }

    SidecarMeta meta;
    if (j.contains("preprocess")) {
        const auto& pj = j["preprocess"];
        PreprocessParams p;
        pj.at("bins").get_to(p.bins);
        pj.at("vmin").get_to(p.vmin);
        pj.at("vmax").get_to(p.vmax);
        pj.at("bin_width").get_to(p.bin_width);
        pj.at("constant").get_to(p.constant);
        pj.at("hist_lut").get_to(p.hist_lut);
        pj.at("inv_lut").get_to(p.inv_lut);
        p.validate();
        meta.preprocess = std::move(p);
    }
    if (j.contains("normalize_bounds")) {
        auto b = j["normalize_bounds"];
        meta.bounds = std::make_pair(b.at(0).get<double>(), b.at(1).get<double>());
    }
    if (j.contains("grid")) meta.grid = grid_from_json(j["grid"]);
    if (j.contains("phantom_spec")) meta.phantom_spec_json = j["phantom_spec"].dump();
    return meta;
}

} // namespace ctsynth
