// Copyright 2026 The Optilearn Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Reference values computed by make_oracles.py (40-digit and exact rational arithmetic).

#include <array>
#include <cstdint>

namespace oracle {

inline constexpr std::array<double, 10> kZetaGrid = {-8.0, -6.0, -4.0, -3.0, -2.0, -1.5, -1.0, -0.5, -0.1, 0.0};
inline constexpr std::array<double, 10> kFZeta = {7.550262411946499e-17, 1.5635697959709664e-10, 7.145258432405667e-06, 0.0003821543170477236, 0.008490702616829637, 0.02930679376260463, 0.0833154705876863, 0.19779655740130603, 0.35093533120471465, 0.3989422804014327};
inline constexpr std::array<double, 10> kCdfGrid = {-5.0, -3.0, -1.96, -1.0, -0.5, 0.0, 0.3, 1.0, 2.5, 4.0};
inline constexpr std::array<double, 10> kCdf = {2.866515718791939e-07, 0.0013498980316300946, 0.024997895148220435, 0.15865525393145705, 0.3085375387259869, 0.5, 0.6179114221889527, 0.8413447460685429, 0.9937903346742238, 0.9999683287581669};
inline constexpr std::array<double, 10> kQuantileGrid = {1e-06, 0.001, 0.025, 0.05, 0.3, 0.5, 0.8, 0.95, 0.975, 0.999999};
inline constexpr std::array<double, 10> kQuantile = {-4.753424308822899, -3.0902323061678136, -1.9599639845400543, -1.6448536269514726, -0.5244005127080408, 0.0, 0.8416212335729144, 1.6448536269514722, 1.9599639845400538, 4.753424308817087};
inline constexpr double kZ975 = 1.9599639845400543;
inline constexpr double kIntervalStd95 = 0.5102134569246539;  // [-1, 1] at 95%
inline constexpr double kKgTwoEqual = 0.28209479177387814;
inline constexpr double kKgTwoEqualK2 = 0.32573500793527993;
inline constexpr double kThompsonShift1 = 0.7602499389065233;
inline constexpr double kExpMinus1 = 0.36787944117144233;
inline constexpr double kUcbScore1 = 2.33856619904585;
inline constexpr double kUcbScore2 = 2.598625002690007;
inline constexpr std::array<double, 3> kIeScores = {26.92820323027551, 21.29150262212918, 29.745966692414832};
inline constexpr std::array<double, 5> kKgFiveMeans = {1.0, 1.5, 0.2, 1.4, -0.3};
inline constexpr std::array<double, 5> kKgFivePrecisions = {0.5, 2.0, 0.25, 1.0, 4.0};
inline constexpr std::array<double, 5> kKgFiveNoise = {1.0, 1.0, 0.5, 2.0, 1.0};
inline constexpr std::array<double, 5> kKgFive = {0.25318328499427034, 0.1177292447602231, 0.19765593725970923, 0.278174971303616, 1.1183088502166568e-17};
inline constexpr double kSCurveNoisePrecisionHigh = 0.1;  // means [0, 1], precisions [1, 1], k_max 20
inline constexpr double kSCurveNoisePrecisionLow = 10.0;
inline constexpr std::size_t kSCurveKBestHigh = 10;
inline constexpr std::size_t kSCurveKBestLow = 1;
inline constexpr double kSCurveBestAverageHigh = 0.002512727083000611;
inline constexpr double kRlsNoiseVariance = 0.7;
inline constexpr std::array<double, 15> kRlsX = {1.0, -0.006826779865523179, -1.2055581426463289, 1.0, 1.0461432923049026, -0.6269554710763733, 1.0, 0.7415884212884828, -1.3206632116051251, 1.0, 0.7239565416499906, -0.10775250794802987, 1.0, 1.6187762233340763, 0.9987636553170226};  // rows are (1, x1, x2)
inline constexpr std::array<double, 5> kRlsY = {-0.02194788627038025, 0.4958800664642217, -1.910768664176647, 0.14706416587832766, -0.9069432512592963};
inline constexpr std::array<double, 3> kRlsTheta0 = {0.5, -0.2, 0.1};
inline constexpr std::array<double, 9> kRlsB0 = {2.0, 0.3, 0.0, 0.3, 1.0, 0.2, 0.0, 0.2, 1.5};
inline constexpr std::array<double, 3> kRlsTheta = {0.17716787587949023, -0.5451419277349697, 0.3208753199049295};
inline constexpr std::array<double, 9> kRlsB = {0.4937971088075569, -0.32580467085631915, 0.19503306289869698, -0.32580467085631915, 0.38572948973773385, -0.12118943469892329, 0.19503306289869696, -0.12118943469892329, 0.2665551776892013};

struct SampledCase {
  std::size_t k;
  std::array<std::int64_t, 4> p_num, p_den;        // P(Y=1 | theta_k)
  std::array<std::int64_t, 4> prior_num, prior_den;
  std::size_t steps;
  std::array<int, 4> outcomes;
  std::array<std::int64_t, 4> post_num, post_den;
};
inline const std::array<SampledCase, 20> kSampledCases = {{
    {2, {3, 9, 0, 0}, {5, 10, 1, 1}, {5, 6, 0, 0}, {11, 11, 1, 1}, 1, {0, 0, 0, 0}, {10, 3, 0, 0}, {13, 13, 1, 1}},
    {4, {9, 7, 9, 4}, {10, 10, 10, 5}, {5, 1, 1, 1}, {12, 3, 6, 12}, 1, {0, 0, 0, 0}, {5, 4, 2, 2}, {21, 7, 21, 21}},
    {3, {1, 4, 1, 0}, {5, 5, 10, 1}, {3, 1, 3, 0}, {8, 4, 8, 1}, 3, {0, 1, 1, 0}, {96, 256, 27, 0}, {379, 379, 379, 1}},
    {3, {3, 7, 9, 0}, {5, 10, 10, 1}, {6, 1, 6, 0}, {13, 13, 13, 1}, 3, {0, 1, 1, 0}, {288, 49, 162, 0}, {499, 499, 499, 1}},
    {3, {3, 1, 1, 0}, {10, 2, 10, 1}, {1, 1, 1, 0}, {2, 4, 4, 1}, 4, {1, 0, 1, 1}, {189, 625, 9, 0}, {506, 1012, 1012, 1}},
    {2, {7, 9, 0, 0}, {10, 10, 1, 1}, {5, 4, 0, 0}, {9, 9, 1, 1}, 4, {1, 1, 1, 0}, {1715, 972, 0, 0}, {2687, 2687, 1, 1}},
    {4, {2, 3, 1, 9}, {5, 10, 10, 10}, {1, 1, 1, 5}, {3, 18, 3, 18}, 4, {1, 0, 1, 0}, {96, 7, 27, 45}, {133, 76, 266, 532}},
    {2, {4, 4, 0, 0}, {5, 5, 1, 1}, {6, 5, 0, 0}, {11, 11, 1, 1}, 3, {1, 1, 1, 0}, {6, 5, 0, 0}, {11, 11, 1, 1}},
    {3, {7, 2, 1, 0}, {10, 5, 2, 1}, {3, 1, 1, 0}, {5, 5, 5, 1}, 2, {1, 1, 0, 0}, {147, 4, 25, 0}, {188, 47, 188, 1}},
    {3, {2, 1, 4, 0}, {5, 2, 5, 1}, {4, 5, 4, 0}, {13, 13, 13, 1}, 4, {0, 1, 1, 1}, {512, 3125, 4096, 0}, {2919, 8757, 8757, 1}},
    {2, {4, 9, 0, 0}, {5, 10, 1, 1}, {3, 4, 0, 0}, {7, 7, 1, 1}, 2, {1, 1, 0, 0}, {16, 27, 0, 0}, {43, 43, 1, 1}},
    {2, {1, 4, 0, 0}, {2, 5, 1, 1}, {3, 1, 0, 0}, {4, 4, 1, 1}, 2, {1, 0, 0, 0}, {75, 16, 0, 0}, {91, 91, 1, 1}},
    {3, {1, 1, 1, 0}, {10, 5, 10, 1}, {2, 5, 5, 0}, {7, 14, 14, 1}, 1, {0, 0, 0, 0}, {36, 40, 45, 0}, {121, 121, 121, 1}},
    {2, {1, 1, 0, 0}, {5, 10, 1, 1}, {5, 3, 0, 0}, {8, 8, 1, 1}, 3, {0, 0, 1, 0}, {640, 243, 0, 0}, {883, 883, 1, 1}},
    {4, {4, 3, 9, 2}, {5, 10, 10, 5}, {1, 5, 1, 5}, {4, 16, 8, 16}, 3, {0, 1, 0, 0}, {128, 735, 18, 720}, {1601, 1601, 1601, 1601}},
    {2, {1, 9, 0, 0}, {2, 10, 1, 1}, {1, 1, 0, 0}, {2, 2, 1, 1}, 2, {0, 1, 0, 0}, {25, 9, 0, 0}, {34, 34, 1, 1}},
    {2, {1, 7, 0, 0}, {5, 10, 1, 1}, {1, 1, 0, 0}, {2, 2, 1, 1}, 3, {1, 0, 0, 0}, {128, 63, 0, 0}, {191, 191, 1, 1}},
    {4, {4, 3, 1, 4}, {5, 5, 2, 5}, {1, 1, 1, 1}, {4, 12, 3, 3}, 2, {0, 0, 0, 0}, {1, 1, 25, 1}, {12, 9, 36, 9}},
    {3, {3, 4, 2, 0}, {5, 5, 5, 1}, {6, 6, 1, 0}, {13, 13, 13, 1}, 4, {0, 0, 0, 0}, {32, 2, 27, 0}, {61, 61, 61, 1}},
    {4, {9, 1, 4, 2}, {10, 10, 5, 5}, {4, 6, 6, 1}, {17, 17, 17, 17}, 2, {0, 0, 0, 0}, {2, 243, 12, 18}, {275, 275, 275, 275}}
}};

}  // namespace oracle
