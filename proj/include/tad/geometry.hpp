// Copyright 2026 The textadapt Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "tad/types.hpp"

namespace tad::geometry {

// Signed polygon area, standard shoelace. In image coordinates (y down)
// a clockwise-on-screen polygon has positive signed area.
double signed_area(std::span<const Vec2> poly);

// Boundary-inclusive point-in-polygon (crossing number plus an
// on-segment check with a small epsilon).
bool point_in_polygon(Vec2 p, std::span<const Vec2> poly);

// Andrew monotone chain; returns hull without repeated endpoint.
std::vector<Vec2> convex_hull(std::vector<Vec2> pts);

// Minimum-area enclosing rotated rectangle (rotating calipers over the
// convex hull). Corners come back clockwise on screen, starting at the
// lexicographically smallest (y, then x) corner. Requires >= 1 point;
// degenerate input (all collinear) yields a zero-width rectangle.
std::array<Vec2, 4> min_area_rect(std::span<const Vec2> pts);

// Convex polygon clip: keeps the part of `subject` inside convex `clip`
// (Sutherland-Hodgman). Both polygons must be oriented positively.
std::vector<Vec2> clip_convex(std::span<const Vec2> subject,
                              std::span<const Vec2> clip);

// Returns the quad's vertices reordered to positive orientation.
std::array<Vec2, 4> oriented(const QuadBox& q);

}  // namespace tad::geometry
