from setuptools import setup, find_packages

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

setup(
    name="jpavnf",
    version="0.1.0",
    author="JPA-VNF contributors",
    description="Joint placement and allocation of virtual network functions: greedy, tree and exact solvers",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(),
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Topic :: System :: Networking",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    python_requires=">=3.9",
    install_requires=[
        "networkx>=2.6",
        "numpy>=1.17",
    ],
    extras_require={
        "tests": ["pytest"],
    },
    package_data={
        "jpavnf": ["fixtures/*.json"],
    },
    entry_points={
        "console_scripts": [
            "jpavnf=jpavnf.cli:main",
        ],
    },
    keywords="vnf nfv placement network-function-virtualization set-cover greedy branch-and-bound",
)
