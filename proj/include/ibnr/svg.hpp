#pragma once

#include <string>

#include "ibnr/nowcast.hpp"

namespace ibnr {

/// Static SVG line chart of a nowcast window: observed partials, point
/// nowcast, dashed 95% bounds, and the realized series where known.
void write_nowcast_svg(const std::string& path, const NowcastResult& result);

} // namespace ibnr
