#pragma once

// Plain zero-padded 2D convolutional classifier on the pixel grid,
// written from the textbook formulas: conv with p square kernels, ReLU,
// fully connected over the flattened feature maps to 10 logits. Mirrors
// the transported-kernel network's layer sequence, its uniform
// 1/sqrt(fan-in) initialization stream, and its batch sampling stream,
// so a paired run differs only in the convolution.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "ptc/dataset.hpp"

namespace oracle {

struct DenseNet {
  int rows = 28;
  int cols = 28;
  int k = 5;                             // square kernel width, odd
  std::vector<Eigen::MatrixXd> kernels;  // one k x k per filter
  Eigen::MatrixXd W;                     // 10 x (rows * cols * filters)
  Eigen::VectorXd b;
};

DenseNet make_dense_net(int rows, int cols, int filters, int k, uint64_t seed);

Eigen::VectorXd dense_forward(const DenseNet& net, const Eigen::MatrixXd& image);

// Mini-batch SGD on softmax cross-entropy. Batch indices come from
// mt19937_64(seed ^ 0x9e3779b97f4a7c15) reduced modulo the set size,
// the same stream the library trainer consumes.
void dense_train(DenseNet& net, const ptc::ImageSet& data, int iterations,
                 int batch_size, double learning_rate, uint64_t seed);

double dense_evaluate(const DenseNet& net, const ptc::ImageSet& data);

}  // namespace oracle
