"""Semiclassical Wigner-Hartree and Vlasov dynamics on periodic phase-space grids."""
