"""Dense complex linear algebra kernel and seeded instance generators."""
