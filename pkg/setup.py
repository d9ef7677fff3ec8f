"""Setup script for lattice-kinetics"""

from setuptools import setup, find_packages
from pathlib import Path

# Read README
readme_path = Path(__file__).parent / "README.md"
long_description = readme_path.read_text() if readme_path.exists() else ""

setup(
    name="lattice-kinetics",
    version="0.1.0",
    description="Numerical laboratory for harmonic lattice dynamics and its kinetic limit",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests", "tests.*"]),
    python_requires=">=3.9",
    install_requires=[
        "numpy>=1.26.3",
        "scipy>=1.11.4",
        "pandas>=2.1.4",
        "pydantic>=2.5.3",
        "pydantic-settings>=2.1.0",
        "PyYAML>=6.0.1",
        "fastapi>=0.109.0",
        "uvicorn[standard]>=0.27.0",
    ],
    extras_require={
        "dev": [
            "pytest>=7.4.4",
            "hypothesis>=6.92.2",
            "httpx>=0.26.0",
            "black>=23.12.1",
            "flake8>=7.0.0",
            "mypy>=1.8.0",
        ]
    },
    entry_points={
        "console_scripts": [
            "lattice-kinetics=src.cli:main",
        ],
    },
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Physics",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
    ],
    include_package_data=True,
    package_data={
        "": ["data/*/*.json", "config.yaml"],
    },
)
