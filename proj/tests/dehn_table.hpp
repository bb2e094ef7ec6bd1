#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace dehn_fixture {

struct Case {
    const char* question;
    std::vector<std::string> elements;
    std::size_t hits;
};

// Hand-counted hits under the token-boundary rule.
inline const std::vector<Case>& table() {
    static const std::vector<Case> cases{
        {"What does the heart pump?", {"heart"}, 1},
        {"What does the heart pump?", {"Heart"}, 1},
        {"What does the heart pump?", {"lung"}, 0},
        {"What does the heart pump?", {"heart", "lung"}, 1},
        {"Which way does blood flow from the heart to the lungs?", {"heart", "lungs", "blood"}, 3},
        {"Which way does blood flow from the heart to the lungs?", {"lung"}, 0},
        {"What eats the sea star?", {"sea star"}, 1},
        {"What eats the sea  star?", {"sea star"}, 1},
        {"What eats the sea otter and star?", {"sea star"}, 0},
        {"Is the heart's wall thick?", {"heart"}, 1},
        {"Where is the left-ventricle?", {"left-ventricle"}, 1},
        {"Where is the left ventricle?", {"left-ventricle"}, 0},
        {"Where is the left-ventricle?", {"ventricle"}, 0},
        {"What is (A) in the figure?", {"A"}, 1},
        {"heart heart heart", {"heart"}, 1},
        {"heart heart heart", {"heart", "heart"}, 1},
        {"heart heart heart", {"heart", "HEART"}, 1},
        {"What connects the aorta, the vena cava and the atrium?", {"aorta", "vena cava", "atrium"}, 3},
        {"What connects the aorta, the vena cava and the atrium?", {"aorta", "vena", "cava"}, 3},
        {"", {"heart"}, 0},
        {"What is this?", {}, 0},
        {"What is this?", {""}, 0},
        {"What is this?", {"   "}, 0},
        {"Why do plants need sunlight?", {"sunlight", "plants", "water"}, 2},
        {"Why do plants need sunlight?", {"sun"}, 0},
        {"What is the pH 3.5 solution?", {"3.5"}, 1},
        {"What happens to the rabbits?", {"rabbit"}, 0},
        {"What happens to the rabbits?", {"rabbits"}, 1},
        {"The Sun warms Earth.", {"sun", "earth", "moon"}, 2},
        {"Does the moon orbit the earth?", {"the moon orbit the earth"}, 1},
    };
    return cases;
}

}  // namespace dehn_fixture
