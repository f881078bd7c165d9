//
// Copyright 2026 The PrivFill Authors
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

#ifndef PRIVFILL_STEMMER_HPP_
#define PRIVFILL_STEMMER_HPP_

#include <string>
#include <string_view>

namespace privfill {

// Porter (1980) suffix stripper, original rule set. Expects a lower-case
// ASCII word; words of two letters or fewer are returned unchanged.
std::string porter_stem(std::string_view word);

}  // namespace privfill

#endif  // PRIVFILL_STEMMER_HPP_
