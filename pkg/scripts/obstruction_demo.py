#!/usr/bin/env python3
"""Show what happens at even order: the construction refuses with a coset
certificate, and the refusal is corroborated by three independent witnesses."""

from __future__ import annotations

from permtwist import ObstructionError, get_ring, obstruction_report, psi_vec, twisted_mode, vac_vec
from permtwist.qchar import evidence_even
from permtwist.twistor import supercommutator_factor_witness, untwist_evenbranch_witness

for k in (2, 4):
    ring = get_ring(k)
    print(f"== k = {k} ==")
    try:
        twisted_mode(psi_vec(ring), 0)
    except ObstructionError as exc:
        print(f"  mode construction refused: indices live on {exc.offset} + {exc.step}*Z")
    rep = obstruction_report(k)
    print(f"  field-exponent census: {rep.status} -- {rep.detail}")
    wit = untwist_evenbranch_witness(psi_vec(ring), psi_vec(ring), vac_vec(ring))
    print(f"  rebuilt-bracket half-integer branch: {wit.status} -- {wit.detail}")
    wit2 = supercommutator_factor_witness(psi_vec(ring), psi_vec(ring), vac_vec(ring))
    print(f"  fractional bracket factor needed: {wit2.status} -- {wit2.detail}")
    ev = evidence_even(k)
    print(f"  character side: {ev.status} -- {ev.detail}")
    print()
