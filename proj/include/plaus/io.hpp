#pragma once

#include <map>
#include <string>
#include <vector>

#include "plaus/dataset.hpp"

namespace plaus {

// CSV with a header row.  Column roles: "sigma" and "n" feed the known
// constants (at most one of the two may appear), "x_*" columns form the fixed
// design in header order, everything else is an observation variable.
Dataset read_dataset_csv(const std::string& path);

// Inline data "key=value,key=value" with ';'-separated lists, e.g.
// "n=25,y=15" or "y=0.3;1.2;0.7".  Keys follow the CSV column roles; "x" or
// "x_*" add design columns, "y" or "y1","y2",... add observation columns.
// Scalars broadcast to the row count.
Dataset parse_inline_data(const std::string& text);

// Splits "a,b,c" into trimmed tokens.
std::vector<std::string> split(const std::string& s, char sep);

// Parses "lo:hi:count" into a uniform grid.
std::vector<double> parse_grid(const std::string& text);

}  // namespace plaus
