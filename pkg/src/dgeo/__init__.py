"""Darboux-frame invariants of curves on parametric surfaces and their Bertrand partner D-curves."""
