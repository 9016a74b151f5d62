#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "errors.hpp"

namespace spdcbell {

/// Ordered chain of (x, y) vertices.
struct Polyline {
    std::vector<std::array<double, 2>> points;
    bool closed = false;
};

/// Marching-squares iso-lines of a scalar field sampled on a rectilinear grid.
/// `field` is row-major with rows along `y` and columns along `x`.
/// Saddle cells are resolved with the cell-center average.
inline std::vector<Polyline> iso_lines(std::span<const double> field, std::span<const double> x,
                                       std::span<const double> y, double level) {
    const std::size_t nx = x.size();
    const std::size_t ny = y.size();
    if (nx < 2 || ny < 2 || field.size() != nx * ny)
        throw ValidationError("iso_lines: field shape does not match its axes");

    auto at = [&](std::size_t r, std::size_t c) { return field[r * nx + c]; };
    auto inside = [&](double v) { return v >= level; };

    // Edge keys: horizontal edge (r,c)-(r,c+1) -> even, vertical (r,c)-(r+1,c) -> odd.
    auto h_key = [&](std::size_t r, std::size_t c) { return static_cast<std::uint64_t>(r * nx + c) << 1; };
    auto v_key = [&](std::size_t r, std::size_t c) { return (static_cast<std::uint64_t>(r * nx + c) << 1) | 1u; };

    auto crossing = [&](std::uint64_t key) -> std::array<double, 2> {
        const std::size_t idx = key >> 1;
        const std::size_t r = idx / nx;
        const std::size_t c = idx % nx;
        const bool vertical = key & 1u;
        const std::size_t r2 = vertical ? r + 1 : r;
        const std::size_t c2 = vertical ? c : c + 1;
        const double va = at(r, c);
        const double vb = at(r2, c2);
        const double t = vb == va ? 0.5 : (level - va) / (vb - va);
        return {x[c] + t * (x[c2] - x[c]), y[r] + t * (y[r2] - y[r])};
    };

    std::vector<std::array<std::uint64_t, 2>> segments;
    for (std::size_t r = 0; r + 1 < ny; ++r) {
        for (std::size_t c = 0; c + 1 < nx; ++c) {
            const double v00 = at(r, c), v01 = at(r, c + 1), v10 = at(r + 1, c), v11 = at(r + 1, c + 1);
            const bool i00 = inside(v00), i01 = inside(v01), i10 = inside(v10), i11 = inside(v11);
            const std::uint64_t bottom = h_key(r, c), top = h_key(r + 1, c);
            const std::uint64_t left = v_key(r, c), right = v_key(r, c + 1);

            std::vector<std::uint64_t> cut;
            if (i00 != i01) cut.push_back(bottom);
            if (i01 != i11) cut.push_back(right);
            if (i11 != i10) cut.push_back(top);
            if (i10 != i00) cut.push_back(left);

            if (cut.size() == 2) {
                segments.push_back({cut[0], cut[1]});
            } else if (cut.size() == 4) {
                const bool center_in = inside(0.25 * (v00 + v01 + v10 + v11));
                const bool diag_main = i00 && i11;
                if (diag_main == center_in) {
                    segments.push_back({bottom, right});
                    segments.push_back({top, left});
                } else {
                    segments.push_back({left, bottom});
                    segments.push_back({right, top});
                }
            }
        }
    }

    std::unordered_map<std::uint64_t, std::vector<std::size_t>> by_edge;
    for (std::size_t i = 0; i < segments.size(); ++i)
        for (auto e : segments[i]) by_edge[e].push_back(i);

    std::vector<bool> used(segments.size(), false);
    std::vector<Polyline> out;

    auto walk = [&](std::size_t seg, std::uint64_t from) {
        std::vector<std::uint64_t> chain{from};
        std::uint64_t edge = from;
        while (true) {
            used[seg] = true;
            const auto& s = segments[seg];
            const std::uint64_t next = s[0] == edge ? s[1] : s[0];
            chain.push_back(next);
            edge = next;
            std::size_t follow = segments.size();
            for (auto cand : by_edge[edge])
                if (!used[cand]) follow = cand;
            if (follow == segments.size()) break;
            seg = follow;
        }
        Polyline line;
        line.closed = chain.size() > 2 && chain.front() == chain.back();
        for (auto e : chain) {
            auto p = crossing(e);
            if (line.points.empty() || line.points.back() != p) line.points.push_back(p);
        }
        out.push_back(std::move(line));
    };

    // Open chains start at an edge touched by a single segment (grid boundary).
    for (std::size_t i = 0; i < segments.size(); ++i) {
        if (used[i]) continue;
        for (auto e : segments[i]) {
            if (by_edge[e].size() == 1) {
                walk(i, e);
                break;
            }
        }
    }
    for (std::size_t i = 0; i < segments.size(); ++i)
        if (!used[i]) walk(i, segments[i][0]);
    return out;
}

}  // namespace spdcbell
