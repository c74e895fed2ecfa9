"""Setup script for ontosem."""

from setuptools import setup, find_packages

with open("requirements.txt") as f:
    requirements = f.read().splitlines()

setup(
    name="ontosem",
    version="0.1.0",
    description="Type-driven compositional semantics with ontological unification",
    author="ontosem Team",
    author_email="example@example.com",
    packages=find_packages(exclude=["tests"]),
    install_requires=requirements,
    entry_points={
        "console_scripts": [
            "ontosem=ontosem.cli:app",
        ],
    },
    python_requires=">=3.10",
)
