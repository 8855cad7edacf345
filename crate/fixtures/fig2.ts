# Ten-state running example
.initial s0
s0 a s7
s7 b s1
s7 c s9
s9 b s2
s1 c s2
s2 d s8
s8 a s4
s4 f s3
s4 e s6
s3 e s5
s6 f s5
s5 d s0
