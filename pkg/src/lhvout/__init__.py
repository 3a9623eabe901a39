"""Local hidden variable models with outcome communication."""
