//
// Copyright 2026 The IRENE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef IRENE_CSV_H_
#define IRENE_CSV_H_

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace irene::csv {

using Row = std::vector<std::string>;

// Shortest decimal that round-trips to the same double; '.' separator.
std::string FormatDouble(double value);
double ParseDouble(std::string_view text);

// RFC 4180: fields containing ',', '"', CR or LF are quoted, quotes doubled.
// Records end with CRLF.
void WriteRow(std::ostream& out, const Row& row);

// Parses a whole RFC 4180 document (CRLF or LF line ends).
std::vector<Row> Parse(std::istream& in);

}  // namespace irene::csv

#endif  // IRENE_CSV_H_
