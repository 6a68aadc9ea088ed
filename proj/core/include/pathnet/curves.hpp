#pragma once

#include <string>
#include <vector>

#include "pathnet/metrics.hpp"

namespace pathnet {

enum class CurvePanel { Fitness, Loss, Both };

/// Learning curves as a standalone SVG. One curve per (phase, iteration)
/// group; x is the tournament generation, y is the winning evaluation's
/// fitness or mean training loss. Output never contains timestamps, so
/// identical metrics give identical bytes. Throws std::invalid_argument
/// when no evaluation rows are present.
std::string render_curves_svg(const std::vector<MetricsRecord>& records, CurvePanel panel);

/// render_curves_svg written atomically to out_path.
void render_curves(const std::vector<MetricsRecord>& records, const std::string& out_path,
                   CurvePanel panel = CurvePanel::Both);

}  // namespace pathnet
