#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ssstab/dataset.hpp"
#include "ssstab/modal.hpp"

// Static SVG figures. Output bytes depend only on the inputs.
namespace ssstab::svg {

/// Legend palette in the fixed label order.
std::string_view label_color(modal::StabilityLabel label);

/// Unit-circle scatter of (re, im) rows. Points are coloured by `colour_by`
/// when given (e.g. predicted labels), else by the dataset labels. Legend lists
/// the labels that occur. Dashed vertical line marks re = 0.
std::string scatter(const dataset::Dataset& ds,
                    std::optional<std::span<const modal::StabilityLabel>> colour_by = std::nullopt,
                    const std::string& title = "Eigenvalue stability classes");

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

/// Line chart with auto-scaled axes. Long series are decimated to at most
/// `max_points` vertices each.
std::string line_plot(std::span<const Series> series, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      std::size_t max_points = 2000);

}  // namespace ssstab::svg
