# State graph of a four-signal handshake controller
.initial s0
s0 b- s16
s16 s+ s17
s16 r- s1
s17 b+ s19
s17 r- s2
s1 s+ s2
s1 a+ s4
s19 r- s3
s2 b+ s3
s2 a+ s5
s4 s+ s5
s3 a+ s6
s5 b+ s6
s6 s- s18
s18 b- s7
s7 s+ s9
s7 r+ s10
s9 b+ s8
s9 r+ s12
s10 s+ s12
s10 a- s13
s8 r+ s11
s12 b+ s11
s12 a- s15
s13 s+ s15
s11 a- s14
s15 b+ s14
s14 s- s0
