#pragma once

#include <optional>
#include <string>
#include <vector>

namespace boxed {

struct Case {
  std::string text;
  std::optional<std::string> want;
};

// Hand-labeled final-answer extraction corpus.
inline std::vector<Case> corpus() {
  using std::nullopt;
  return {
      {"\\boxed{42}", "42"},
      {"The answer is $\\boxed{42}$.", "42"},
      {"So x = \\boxed{-3}", "-3"},
      {"\\boxed{\\frac{1}{2}}", "\\frac{1}{2}"},
      {"\\boxed{\\frac{\\sqrt{3}}{2}}", "\\frac{\\sqrt{3}}{2}"},
      {"\\boxed{2+\\sqrt{3}}", "2+\\sqrt{3}"},
      {"\\boxed{\\dfrac{5}{6}}", "\\dfrac{5}{6}"},
      {"\\boxed{(1, 2)}", "(1, 2)"},
      {"\\boxed{\\left(3,4\\right)}", "\\left(3,4\\right)"},
      {"\\boxed{\\{1,2\\}}", "\\{1,2\\}"},
      {"\\boxed{a\\}b}", "a\\}b"},
      {"\\boxed{x^{2^{3}}}", "x^{2^{3}}"},
      {"\\boxed{{{{{deep}}}}}", "{{{{deep}}}}"},
      {"\\boxed{}", ""},
      {"\\boxed{ 7 }", " 7 "},
      {"\\boxed{\\text{east}}", "\\text{east}"},
      {"\\boxed{9\\pi}", "9\\pi"},
      {"\\boxed{10\\%}", "10\\%"},
      {"\\boxed{3 \\text{ cm}^2}", "3 \\text{ cm}^2"},
      {"\\boxed{x \\in [0, 1)}", "x \\in [0, 1)"},
      {"First \\boxed{1} then \\boxed{2}", "2"},
      {"\\boxed{1}, wait, actually \\boxed{\\frac{3}{4}}.", "\\frac{3}{4}"},
      {"Step 3: Therefore $\\boxed{\\frac{5}{6}}$.", "\\frac{5}{6}"},
      {"multi\nline\n\\boxed{\n12\n}\nend", "\n12\n"},
      {"\\boxed{a}}}", "a"},
      {"$$\\boxed{\\begin{pmatrix} 1 \\\\ 2 \\end{pmatrix}}$$",
       "\\begin{pmatrix} 1 \\\\ 2 \\end{pmatrix}"},
      {"\\boxed{\\sqrt[3]{2}}", "\\sqrt[3]{2}"},
      {"\\boxed{f(x)=\\{x\\}}", "f(x)=\\{x\\}"},
      {"\\boxed{\\mathrm{B}}", "\\mathrm{B}"},
      {"\\boxed{\\frac{1}{2}} and some trailing text with {braces}", "\\frac{1}{2}"},
      {"no answer here", nullopt},
      {"", nullopt},
      {"boxed{3}", nullopt},
      {"\\boxed 3", nullopt},
      {"\\boxed{unclosed", nullopt},
      {"\\boxed{\\frac{1}{2}", nullopt},
      {"\\boxed{1} and later \\boxed{2", nullopt},
      {"\\boxed{a\\}", nullopt},
      {"\\fbox{5}", nullopt},
      {"The answer is 42.", nullopt},
  };
}

}  // namespace boxed
