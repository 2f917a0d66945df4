#pragma once

#include "tsemos/models.hpp"

namespace tsemos::detail {

std::vector<GaussianParams> predict_emos(const FittedModel& model, const StationSeries& series, std::size_t begin,
                                         std::size_t end, const FitOptions& options);
std::vector<GaussianParams> predict_ar_emos(const FittedModel& model, const StationSeries& series,
                                            std::size_t begin, std::size_t end, const FitOptions& options);

void require_complete(const StationSeries& series, std::string_view what);

}  // namespace tsemos::detail
