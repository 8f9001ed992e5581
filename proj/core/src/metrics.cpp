#include "ctsynth/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace ctsynth {

namespace {

void check_same_dims(const Volume& a, const Volume& b) {
    if (a.dims != b.dims) throw error(errc::shape_mismatch, "volume dims differ");
}

struct SsimConsts {
    double c1, c2;
};

double ssim_from_stats(double mx, double my, double vx, double vy, double cov,
                       const SsimConsts& c) {
    return ((2.0 * mx * my + c.c1) * (2.0 * cov + c.c2)) /
           ((mx * mx + my * my + c.c1) * (vx + vy + c.c2));
}

// One SSIM value from a boxed region [x0,x0+wx) x [y0,y0+wy) x [z0,z0+wz).
double ssim_window(const Volume& a, const Volume& b, std::int64_t x0, std::int64_t y0,
                   std::int64_t z0, std::int64_t wx, std::int64_t wy, std::int64_t wz,
                   const SsimConsts& c) {
    const double n = static_cast<double>(wx * wy * wz);
    double sa = 0, sb = 0;
    for (std::int64_t z = z0; z < z0 + wz; ++z)
        for (std::int64_t y = y0; y < y0 + wy; ++y) {
            const double* pa = &a.data[static_cast<std::size_t>(a.index(x0, y, z))];
            const double* pb = &b.data[static_cast<std::size_t>(b.index(x0, y, z))];
            for (std::int64_t x = 0; x < wx; ++x) {
                sa += pa[x];
                sb += pb[x];
            }
        }
    const double mx = sa / n, my = sb / n;
    double vx = 0, vy = 0, cov = 0;
    for (std::int64_t z = z0; z < z0 + wz; ++z)
        for (std::int64_t y = y0; y < y0 + wy; ++y) {
            const double* pa = &a.data[static_cast<std::size_t>(a.index(x0, y, z))];
            const double* pb = &b.data[static_cast<std::size_t>(b.index(x0, y, z))];
            for (std::int64_t x = 0; x < wx; ++x) {
                const double da = pa[x] - mx;
                const double db = pb[x] - my;
                vx += da * da;
                vy += db * db;
                cov += da * db;
            }
        }
    return ssim_from_stats(mx, my, vx / n, vy / n, cov / n, c);
}

// Mean windowed SSIM with per-axis window extents.
double ssim_windowed_general(const Volume& a, const Volume& b, std::int64_t wx, std::int64_t wy,
                             std::int64_t wz, const SsimConsts& c) {
    const std::int64_t px = a.nx() - wx + 1;
    const std::int64_t py = a.ny() - wy + 1;
    const std::int64_t pz = a.nz() - wz + 1;
    double sum = 0;
    for (std::int64_t z = 0; z < pz; ++z)
        for (std::int64_t y = 0; y < py; ++y)
            for (std::int64_t x = 0; x < px; ++x)
                sum += ssim_window(a, b, x, y, z, wx, wy, wz, c);
    return sum / static_cast<double>(px * py * pz);
}

} // namespace

double mse(const Volume& a, const Volume& b) {
    check_same_dims(a, b);
    double acc = 0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.data.size());
}

double psnr(const Volume& a, const Volume& b, double data_range) {
    check_same_dims(a, b);
    if (data_range <= 0) throw error(errc::invalid_params, "data_range must be positive");
    const double m = mse(a, b);
    if (m == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(data_range * data_range / m);
}

double ssim(const Volume& a, const Volume& b, SsimMode mode, std::int64_t window, double k1,
            double k2, double data_range) {
    check_same_dims(a, b);
    const SsimConsts c{(k1 * data_range) * (k1 * data_range),
                       (k2 * data_range) * (k2 * data_range)};
    if (mode == SsimMode::global)
        return ssim_window(a, b, 0, 0, 0, a.nx(), a.ny(), a.nz(), c);
    if (window < 1 || window % 2 == 0)
        throw error(errc::invalid_params, "window must be odd and positive");
    if (window > std::min({a.nx(), a.ny(), a.nz()}))
        throw error(errc::window_too_large, "window exceeds the smallest volume extent");
    return ssim_windowed_general(a, b, window, window, window, c);
}

QualityReport evaluate_pair(const Volume& real, const Volume& generated) {
    check_same_dims(real, generated);

    QualityReport r;
    const auto [alo, ahi] = real.min_max();
    const auto [blo, bhi] = generated.min_max();
    const double range = std::max(ahi, bhi) - std::min(alo, blo);
    r.data_range = range > 0 ? range : 1.0;

    const SsimConsts c{(0.01 * r.data_range) * (0.01 * r.data_range),
                       (0.03 * r.data_range) * (0.03 * r.data_range)};
    const std::int64_t nx = real.nx(), ny = real.ny(), nz = real.nz();
    const std::int64_t slice_len = nx * ny;
    const std::int64_t wx = std::min<std::int64_t>(7, nx);
    const std::int64_t wy = std::min<std::int64_t>(7, ny);

    double psnr_sum = 0, ssim_sum = 0;
    std::int64_t psnr_count = 0;
    for (std::int64_t z = 0; z < nz; ++z) {
        Volume sa(nx, ny, 1), sb(nx, ny, 1);
        std::copy_n(real.data.begin() + z * slice_len, slice_len, sa.data.begin());
        std::copy_n(generated.data.begin() + z * slice_len, slice_len, sb.data.begin());

        SliceMetrics m;
        m.z = z;
        const double slice_mse = mse(sa, sb);
        m.identical = slice_mse == 0.0;
        m.psnr_db = m.identical
                        ? std::numeric_limits<double>::infinity()
                        : 10.0 * std::log10(r.data_range * r.data_range / slice_mse);
        m.ssim = ssim_windowed_general(sa, sb, wx, wy, 1, c);
        ssim_sum += m.ssim;
        if (m.identical) {
            ++r.identical_slices;
        } else {
            psnr_sum += m.psnr_db;
            ++psnr_count;
        }
        r.per_slice.push_back(m);
    }

    r.ssim = ssim_sum / static_cast<double>(nz);
    r.psnr_db = psnr_count > 0 ? psnr_sum / static_cast<double>(psnr_count)
                               : std::numeric_limits<double>::infinity();
    r.volume_psnr_db = psnr(real, generated, r.data_range);
    const std::int64_t wv = std::min<std::int64_t>({7, nx, ny, nz});
    const std::int64_t wodd = wv % 2 == 0 ? wv - 1 : wv;
    r.volume_ssim = wodd >= 1 ? ssim(real, generated, SsimMode::windowed, wodd, 0.01, 0.03,
                                     r.data_range)
                              : ssim(real, generated, SsimMode::global, 7, 0.01, 0.03,
                                     r.data_range);
    return r;
}

namespace {
std::string fmt_db(double v) {
    if (std::isinf(v)) return "inf";
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}
} // namespace

std::string report_to_text(const QualityReport& r) {
    std::ostringstream os;
    os << "metric          value\n";
    os << "psnr_db (mean)  " << fmt_db(r.psnr_db) << "\n";
    os << "ssim (mean)     " << fmt_db(r.ssim) << "\n";
    os << "psnr_db (vol)   " << fmt_db(r.volume_psnr_db) << "\n";
    os << "ssim (vol)      " << fmt_db(r.volume_ssim) << "\n";
    os << "data_range      " << fmt_db(r.data_range) << "\n";
    os << "identical_slices " << r.identical_slices << " of " << r.per_slice.size() << "\n";
    return os.str();
}

void save_report(const std::string& path, const QualityReport& r) {
    using nlohmann::json;
    auto num_or_inf = [](double v) -> json {
        if (std::isinf(v)) return "inf";
        return v;
    };
    json slices = json::array();
    for (const auto& m : r.per_slice)
        slices.push_back(json{{"z", m.z},
                              {"psnr_db", num_or_inf(m.psnr_db)},
                              {"ssim", m.ssim},
                              {"identical", m.identical}});
    json j{{"psnr_db", num_or_inf(r.psnr_db)},
           {"ssim", r.ssim},
           {"volume_psnr_db", num_or_inf(r.volume_psnr_db)},
           {"volume_ssim", r.volume_ssim},
           {"data_range", r.data_range},
           {"identical_slices", r.identical_slices},
           {"per_slice", slices}};
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw error(errc::io_failure, "cannot create " + path);
    f << j.dump(2) << "\n";
    if (!f) throw error(errc::io_failure, "write failed for " + path);
}

} // namespace ctsynth
