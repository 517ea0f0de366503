// Copyright (C) 2026 tablepref contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string_view>

namespace tablepref::prompts {

// Problem-definition templates, kept byte-for-byte (including the mixed
// quote characters and the trailing space of the grid template).

inline constexpr std::string_view kObjectsAsLanguage =
    R"TPL(My preferences for setting a table are shown in the first images. You are helping me set the table in the final image according to my preferences. What objects should I place in this image, where should I place them, and how should they be oriented? Give a position in [x,y] where each value is a number between 0 and 1. Give rotation as the number of degrees clockwise from image north. Give your answer as a python list formatted as follows: [{'type':object_type, 'id': object_reference_id, 'position': [x, y], ‘rotation’: degrees}]. Give object_id as an integer. Include only this list in your response.)TPL";

inline constexpr std::string_view kUnmarkedArrangements =
    R"TPL(My preferences for setting a table are shown in the images named final_state_K.jpg. You are helping me set the table in initial_state_1.jpg according to my preferences. What objects should I place in this image, where should I place them, and how should they be oriented? Give a position in [x,y] where each value is a number between 0 and 1. Give rotation as the number of degrees clockwise from image north. Give your answer as a python list formatted as follows: [{`type':object_type, `id': object_reference_id, `position': [x, y], `rotation': degrees}]. Give object_id as an integer. Include only this list in your response.)TPL";

inline constexpr std::string_view kGridMarkedArrangements =
    R"TPL(My preferences for setting a table are shown in the images named final_state_N.jpg. You are helping me set the table in initial_state_1.jpg according to my preferences. What objects should I place in this image, where should I place them, and how should they be oriented? Please list all grid cells the object will intersect after it is placed. Give the orientation as the closest cardinal direction [N, NE, E, SE, S, SW, W, NW] the object is pointing in after it is placed. The top of the image is N. Give your answer as a python list formatted as follows: [{`type':object_type, `id': object_reference_id, `position':[grid_cell_ids], `cardinal_direction':direction}]. Give grid_cell_ids as a list of string. Give object_id as an integer. Include only this list in your response. )TPL";

}  // namespace tablepref::prompts
