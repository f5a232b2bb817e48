#pragma once

namespace lantern::detail {

void note_forward_evaluation();

}  // namespace lantern::detail
