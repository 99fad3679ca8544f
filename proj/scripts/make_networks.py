#!/usr/bin/env python3
"""Builds the two shipped ReLU controllers without any training.

Each controller is a saturated linear feedback law written in a ReLU hinge
basis: for a scalar feedback signal s, the first hidden layer holds neurons
relu(s - t) and relu(-s - t) for a ladder of thresholds t, the second hidden
layer is a positive rescaling of the first (always active), and the output
layer recombines the hinges into a piecewise-linear saturation of s.

Usage: python3 scripts/make_networks.py [output_dir]
"""

import json
import math
import sys
from pathlib import Path


def hinge_saturation(thresholds, limit):
    """Coefficients c_j so that sum_j c_j*(relu(s-t_j) - relu(-s-t_j))
    follows limit*tanh(s/limit) through the breakpoints."""
    def g(s):
        return limit * math.tanh(s / limit)

    slopes = []
    for j, t in enumerate(thresholds):
        t_next = thresholds[j + 1] if j + 1 < len(thresholds) else None
        if t_next is None:
            slopes.append(0.0)
        else:
            slopes.append((g(t_next) - g(t)) / (t_next - t))
    coeffs = [slopes[0]] + [slopes[j] - slopes[j - 1] for j in range(1, len(slopes))]
    return coeffs


class Builder:
    def __init__(self, n_in):
        self.n_in = n_in
        self.rows = []      # first-layer rows (W, b)
        self.out_terms = []  # (output index, neuron index, coefficient)

    def add_saturated_channel(self, out_index, gain_row, offset, thresholds, limit, sign):
        coeffs = hinge_saturation(thresholds, limit)
        for t, c in zip(thresholds, coeffs):
            pos = len(self.rows)
            self.rows.append(([g for g in gain_row], offset - t))
            neg = len(self.rows)
            self.rows.append(([-g for g in gain_row], -offset - t))
            self.out_terms.append((out_index, pos, sign * c))
            self.out_terms.append((out_index, neg, -sign * c))

    def build(self, n_hidden, n_out, out_bias):
        assert len(self.rows) <= n_hidden, (len(self.rows), n_hidden)
        while len(self.rows) < n_hidden:
            # Dead neuron: zero weights, negative bias.
            self.rows.append(([0.0] * self.n_in, -1.0))
        w1 = [r[0] for r in self.rows]
        b1 = [r[1] for r in self.rows]
        # Second layer: positive per-neuron scaling, so every neuron stays active.
        scale = [0.5 + 0.5 * ((j * 37) % 7) / 6.0 for j in range(n_hidden)]
        w2 = [[scale[i] if i == j else 0.0 for j in range(n_hidden)] for i in range(n_hidden)]
        b2 = [0.0] * n_hidden
        w3 = [[0.0] * n_hidden for _ in range(n_out)]
        for out_index, neuron, c in self.out_terms:
            w3[out_index][neuron] += c / scale[neuron]
        return {
            "layers": [
                {"W": w1, "b": b1, "act": "relu"},
                {"W": w2, "b": b2, "act": "relu"},
            ],
            "out": {"W": w3, "b": out_bias},
        }


def vehicle_controller():
    # State (px, py, phi, v). Holds the heading at -1.4 rad, which passes the
    # obstacle at (4, 4) on its east side, at speed 2. Steering saturates at
    # 0.6 rad, acceleration at 1.
    heading = -1.4
    k_phi, k_v = 0.6, 0.5
    # s = k_phi*(phi - heading); u2 = -sat(s)
    steer_row = [0.0, 0.0, k_phi, 0.0]
    steer_offset = -k_phi * heading
    # r = k_v*(v - 2); u1 = -sat(r)
    speed_row = [0.0, 0.0, 0.0, k_v]
    speed_offset = -2.0 * k_v

    b = Builder(4)
    b.add_saturated_channel(1, steer_row, steer_offset,
                            [0.05 * j for j in range(25)], 0.6, -1.0)
    b.add_saturated_channel(0, speed_row, speed_offset,
                            [0.1 * j for j in range(25)], 1.0, -1.0)
    return b.build(100, 2, [0.0, 0.0])


def quadrotor_controller():
    # State (px, py, pz, vx, vy, vz); inputs (tan theta, tan phi, thrust).
    # PD regulation of position toward (0, 0, 2.5) with saturated accelerations.
    g = 9.8
    kp, kd = 0.25, 0.5
    target = (0.0, 0.0, 2.5)
    b = Builder(6)
    ladder = [0.0, 0.5, 1.0, 1.5, 2.0]
    # u1 = a_x / g, a_x = sat(-(kp*(px - tx) + kd*vx))
    b.add_saturated_channel(0, [kp, 0, 0, kd, 0, 0], -kp * target[0], ladder, 2.0, -1.0 / g)
    # u2 = -a_y / g
    b.add_saturated_channel(1, [0, kp, 0, 0, kd, 0], -kp * target[1], ladder, 2.0, 1.0 / g)
    # u3 = g + a_z
    b.add_saturated_channel(2, [0, 0, kp, 0, 0, kd], -kp * target[2], ladder, 2.0, -1.0)
    return b.build(32, 3, [0.0, 0.0, g])


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "networks"
    out.mkdir(parents=True, exist_ok=True)
    for name, net in (("vehicle_controller.json", vehicle_controller()),
                      ("quadrotor_controller.json", quadrotor_controller())):
        (out / name).write_text(json.dumps(net, indent=1) + "\n")
        print("wrote", out / name)


if __name__ == "__main__":
    main()
