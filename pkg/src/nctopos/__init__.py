"""Finite noncommutative topos toolkit: skew lattices, noncommutative Heyting
algebras, presheaf classifiers, noncommutative topologies and sheaf checking."""

__version__ = "0.1.0"
