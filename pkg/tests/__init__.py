"""
Test Suite for fggm-lab

Run tests:
    pytest tests/
    pytest tests/ -m "not slow" --cov=channel --cov=mdp --cov=polytope --cov=attack
"""
