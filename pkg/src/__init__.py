"""Three-well Bose-Hubbard mode splitter simulator package."""
