"""pertlab: exact perturbation calculus for filtered chain complexes.

Subpackages are organized bottom-up:

- exactlin: integer matrices, Smith normal form, homology invariants
- chaincore: filtered chain complexes, graded maps, hom complexes
- sdr_bpl: strong deformation retracts and the basic perturbation lemma
- she_obstruction: homotopy equivalences, obstruction classes, extension
- operad_sym: the symbolic two-colored operad engine
- ipl_pipeline: operad actions and perturbation transfer along equivalences
- fixtures: seeded deterministic example builders
- cli_io: JSON document formats and the command-line surface
"""

__version__ = "0.1.0"
