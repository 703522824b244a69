#pragma once

#include <string>

#include "lorhol/metric.hpp"
#include "lorhol/projective.hpp"

namespace lorhol {

// Metric files:
//   {"format": "lorhol-metric", "version": 1, "coordinates": [4 names],
//    "parameters": {name: number}, "metric": 4 rows of expression strings (full, or lower
//    triangle with row i holding i+1 entries), "constraints": [expr > 0 ...],
//    "sample_box": [[lo, hi] x 4]}
// Sinyukov files (coordinates and parameters come from the base metric):
//   {"format": "lorhol-sinyukov", "version": 1, "tensor": rows as above,
//    "lambda": [4 expression strings] | "derive-from-trace"}
// Malformed files raise SpecFileError; bad expressions raise ParseError.

MetricSpec parse_metric_json(const std::string& text);
std::string metric_to_json(const MetricSpec& spec);

SinyukovPair parse_sinyukov_json(const std::string& text, const MetricSpec& base);
std::string sinyukov_to_json(const SinyukovPair& pair);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace lorhol
